#include "awblstm/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "awblstm/errors.hpp"

namespace awblstm {

std::vector<double> finite_difference(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
    double step) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + step;
        const double fp = f(x);
        x[i] = orig - step;
        const double fm = f(x);
        x[i] = orig;
        g[i] = (fp - fm) / (2.0 * step);
    }
    return g;
}

double rel_error(double a, double b, double floor) {
    const double diff = std::abs(a - b);
    if (diff == 0.0) return 0.0;
    return diff / std::max({std::abs(a), std::abs(b), floor});
}

double max_rel_error(const std::vector<double>& a, const std::vector<double>& b,
                     double floor) {
    if (a.size() != b.size()) {
        throw ContractError("max_rel_error: length mismatch " + std::to_string(a.size()) +
                            " vs " + std::to_string(b.size()));
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, rel_error(a[i], b[i], floor));
    }
    return worst;
}

}  // namespace awblstm
