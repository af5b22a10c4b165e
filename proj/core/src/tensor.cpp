#include "awblstm/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "awblstm/errors.hpp"

namespace awblstm {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

double stable_sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

// --------------------------------------------------------------------------
// Tensor

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)),
      data_(std::make_shared<std::vector<double>>(shape_product(shape_), 0.0)) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::make_shared<std::vector<double>>(std::move(data))) {
    if (shape_product(shape_) != data_->size()) {
        throw ShapeError("tensor: shape " + shape_str() + " does not match data length " +
                         std::to_string(data_->size()));
    }
}

Tensor Tensor::row(std::vector<double> data) {
    std::size_t n = data.size();
    return Tensor({n}, std::move(data));
}

double Tensor::item() const {
    if (size() != 1) {
        throw ContractError("item: tensor of shape " + shape_str() + " is not a scalar");
    }
    return (*data_)[0];
}

bool Tensor::all_finite() const {
    for (double v : *data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) os << ',';
        os << shape_[i];
    }
    os << ']';
    return os.str();
}

// --------------------------------------------------------------------------
// Tape plumbing

Tensor Tape::attach(std::vector<std::size_t> shape, std::vector<double> data, BackFn back) {
    Tensor out(std::move(shape), std::move(data));
    out.tape_ = this;
    out.node_ = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{std::move(back), out.size()});
    return out;
}

void Tape::check_same_tape(const Tensor& t) const {
    if (!t.defined()) throw ContractError("undefined tensor operand");
    if (t.requires_grad() && t.tape_ != this) {
        throw ContractError("operand is tracked by a different tape");
    }
}

std::vector<double>& Tape::adjoint(int node) {
    auto& g = adjoints_[static_cast<std::size_t>(node)];
    if (g.empty()) g.assign(nodes_[static_cast<std::size_t>(node)].out_size, 0.0);
    return g;
}

Tensor Tape::watch(const Tensor& t) {
    if (!t.defined()) throw ContractError("watch: undefined tensor");
    if (t.requires_grad()) {
        check_same_tape(t);
        return t;
    }
    Tensor out = t;  // shares the data buffer
    out.tape_ = this;
    out.node_ = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{{}, t.size()});
    return out;
}

void Tape::backward(const Tensor& loss) {
    if (!loss.requires_grad() || loss.tape_ != this) {
        throw ContractError("backward: loss was not produced under this tape");
    }
    if (loss.size() != 1) {
        throw ContractError("backward: loss must be scalar, got shape " + loss.shape_str());
    }
    adjoints_.assign(nodes_.size(), {});
    adjoint(loss.node_) = {1.0};
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        if (adjoints_[i].empty() || !nodes_[i].back) continue;
        nodes_[i].back(*this, adjoints_[i]);
    }
}

const std::vector<double>& Tape::grad(const Tensor& t) const {
    if (!t.requires_grad() || t.tape_ != this) {
        throw ContractError("grad: tensor is not tracked by this tape");
    }
    auto* self = const_cast<Tape*>(this);
    if (self->adjoints_.size() < nodes_.size()) self->adjoints_.resize(nodes_.size());
    return self->adjoint(t.node_);
}

void Tape::clear() {
    nodes_.clear();
    adjoints_.clear();
}

// --------------------------------------------------------------------------
// Primitive operations

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
    check_same_tape(a);
    check_same_tape(b);
    if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows()) {
        throw ShapeError("matmul: " + a.shape_str() + " x " + b.shape_str());
    }
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    std::vector<double> out(m * n, 0.0);
    {
        const double* pa = a.data();
        const double* pb = b.data();
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t l = 0; l < k; ++l) {
                const double av = pa[i * k + l];
                const double* brow = pb + l * n;
                double* orow = out.data() + i * n;
                for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
            }
        }
    }
    if (!a.requires_grad() && !b.requires_grad()) return Tensor({m, n}, std::move(out));

    auto ad = a.data_, bd = b.data_;
    const int an = a.node_, bn = b.node_;
    return attach({m, n}, std::move(out),
                  [m, k, n, ad, bd, an, bn](Tape& tp, const std::vector<double>& go) {
                      if (an >= 0) {
                          auto& ga = tp.adjoint(an);
                          const double* pb = bd->data();
                          for (std::size_t i = 0; i < m; ++i) {
                              for (std::size_t l = 0; l < k; ++l) {
                                  const double* brow = pb + l * n;
                                  const double* grow = go.data() + i * n;
                                  double acc = 0.0;
                                  for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
                                  ga[i * k + l] += acc;
                              }
                          }
                      }
                      if (bn >= 0) {
                          auto& gb = tp.adjoint(bn);
                          const double* pa = ad->data();
                          for (std::size_t i = 0; i < m; ++i) {
                              const double* grow = go.data() + i * n;
                              for (std::size_t l = 0; l < k; ++l) {
                                  const double av = pa[i * k + l];
                                  double* gbrow = gb.data() + l * n;
                                  for (std::size_t j = 0; j < n; ++j) gbrow[j] += av * grow[j];
                              }
                          }
                      }
                  });
}

Tensor Tape::matvec(const Tensor& m, const Tensor& v) {
    check_same_tape(m);
    check_same_tape(v);
    if (m.rank() != 2 || v.rank() != 1 || m.cols() != v.size()) {
        throw ShapeError("matvec: " + m.shape_str() + " x " + v.shape_str());
    }
    const std::size_t r = m.rows(), c = m.cols();
    std::vector<double> out(r, 0.0);
    {
        const double* pm = m.data();
        const double* pv = v.data();
        for (std::size_t i = 0; i < r; ++i) {
            const double* row = pm + i * c;
            double acc = 0.0;
            for (std::size_t j = 0; j < c; ++j) acc += row[j] * pv[j];
            out[i] = acc;
        }
    }
    if (!m.requires_grad() && !v.requires_grad()) return Tensor({r}, std::move(out));

    auto md = m.data_, vd = v.data_;
    const int mn = m.node_, vn = v.node_;
    return attach({r}, std::move(out),
                  [r, c, md, vd, mn, vn](Tape& tp, const std::vector<double>& go) {
                      if (mn >= 0) {
                          auto& gm = tp.adjoint(mn);
                          const double* pv = vd->data();
                          for (std::size_t i = 0; i < r; ++i) {
                              const double gi = go[i];
                              if (gi == 0.0) continue;
                              double* grow = gm.data() + i * c;
                              for (std::size_t j = 0; j < c; ++j) grow[j] += gi * pv[j];
                          }
                      }
                      if (vn >= 0) {
                          auto& gv = tp.adjoint(vn);
                          const double* pm = md->data();
                          for (std::size_t i = 0; i < r; ++i) {
                              const double gi = go[i];
                              if (gi == 0.0) continue;
                              const double* row = pm + i * c;
                              for (std::size_t j = 0; j < c; ++j) gv[j] += gi * row[j];
                          }
                      }
                  });
}

Tensor Tape::vecmat(const Tensor& v, const Tensor& m) {
    check_same_tape(v);
    check_same_tape(m);
    if (v.rank() != 1 || m.rank() != 2 || v.size() != m.rows()) {
        throw ShapeError("vecmat: " + v.shape_str() + " x " + m.shape_str());
    }
    const std::size_t t = m.rows(), n = m.cols();
    std::vector<double> out(n, 0.0);
    {
        const double* pv = v.data();
        const double* pm = m.data();
        for (std::size_t i = 0; i < t; ++i) {
            const double vi = pv[i];
            if (vi == 0.0) continue;
            const double* row = pm + i * n;
            for (std::size_t j = 0; j < n; ++j) out[j] += vi * row[j];
        }
    }
    if (!v.requires_grad() && !m.requires_grad()) return Tensor({n}, std::move(out));

    auto vd = v.data_, md = m.data_;
    const int vn = v.node_, mn = m.node_;
    return attach({n}, std::move(out),
                  [t, n, vd, md, vn, mn](Tape& tp, const std::vector<double>& go) {
                      if (vn >= 0) {
                          auto& gv = tp.adjoint(vn);
                          const double* pm = md->data();
                          for (std::size_t i = 0; i < t; ++i) {
                              const double* row = pm + i * n;
                              double acc = 0.0;
                              for (std::size_t j = 0; j < n; ++j) acc += row[j] * go[j];
                              gv[i] += acc;
                          }
                      }
                      if (mn >= 0) {
                          auto& gm = tp.adjoint(mn);
                          const double* pv = vd->data();
                          for (std::size_t i = 0; i < t; ++i) {
                              const double vi = pv[i];
                              if (vi == 0.0) continue;
                              double* grow = gm.data() + i * n;
                              for (std::size_t j = 0; j < n; ++j) grow[j] += vi * go[j];
                          }
                      }
                  });
}

Tensor Tape::add(const Tensor& a, const Tensor& b) {
    check_same_tape(a);
    check_same_tape(b);
    const bool bias_rows = a.rank() == 2 && b.rank() == 1 && a.cols() == b.size();
    if (!bias_rows && a.shape() != b.shape()) {
        throw ShapeError("add: " + a.shape_str() + " + " + b.shape_str());
    }
    std::vector<double> out(a.size());
    if (bias_rows) {
        const std::size_t r = a.rows(), c = a.cols();
        const double* pa = a.data();
        const double* pb = b.data();
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) out[i * c + j] = pa[i * c + j] + pb[j];
    } else {
        const double* pa = a.data();
        const double* pb = b.data();
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = pa[i] + pb[i];
    }
    if (!a.requires_grad() && !b.requires_grad()) return Tensor(a.shape(), std::move(out));

    const int an = a.node_, bn = b.node_;
    const std::size_t bsize = b.size();
    return attach(a.shape(), std::move(out),
                  [an, bn, bias_rows, bsize](Tape& tp, const std::vector<double>& go) {
                      if (an >= 0) {
                          auto& ga = tp.adjoint(an);
                          for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
                      }
                      if (bn >= 0) {
                          auto& gb = tp.adjoint(bn);
                          if (bias_rows) {
                              for (std::size_t i = 0; i < go.size(); ++i) gb[i % bsize] += go[i];
                          } else {
                              for (std::size_t i = 0; i < go.size(); ++i) gb[i] += go[i];
                          }
                      }
                  });
}

Tensor Tape::mul(const Tensor& a, const Tensor& b) {
    check_same_tape(a);
    check_same_tape(b);
    if (a.shape() != b.shape()) {
        throw ShapeError("mul: " + a.shape_str() + " * " + b.shape_str());
    }
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
    if (!a.requires_grad() && !b.requires_grad()) return Tensor(a.shape(), std::move(out));

    auto ad = a.data_, bd = b.data_;
    const int an = a.node_, bn = b.node_;
    return attach(a.shape(), std::move(out),
                  [ad, bd, an, bn](Tape& tp, const std::vector<double>& go) {
                      if (an >= 0) {
                          auto& ga = tp.adjoint(an);
                          for (std::size_t i = 0; i < go.size(); ++i)
                              ga[i] += go[i] * (*bd)[i];
                      }
                      if (bn >= 0) {
                          auto& gb = tp.adjoint(bn);
                          for (std::size_t i = 0; i < go.size(); ++i)
                              gb[i] += go[i] * (*ad)[i];
                      }
                  });
}

Tensor Tape::sigmoid(const Tensor& x) {
    check_same_tape(x);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = stable_sigmoid(x.data()[i]);
    if (!x.requires_grad()) return Tensor(x.shape(), std::move(out));

    Tensor result = attach(x.shape(), std::move(out), {});
    auto yd = result.data_;
    const int xn = x.node_;
    nodes_.back().back = [yd, xn](Tape& tp, const std::vector<double>& go) {
        auto& gx = tp.adjoint(xn);
        for (std::size_t i = 0; i < go.size(); ++i) {
            const double y = (*yd)[i];
            gx[i] += go[i] * y * (1.0 - y);
        }
    };
    return result;
}

Tensor Tape::tanh(const Tensor& x) {
    check_same_tape(x);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(x.data()[i]);
    if (!x.requires_grad()) return Tensor(x.shape(), std::move(out));

    Tensor result = attach(x.shape(), std::move(out), {});
    auto yd = result.data_;
    const int xn = x.node_;
    nodes_.back().back = [yd, xn](Tape& tp, const std::vector<double>& go) {
        auto& gx = tp.adjoint(xn);
        for (std::size_t i = 0; i < go.size(); ++i) {
            const double y = (*yd)[i];
            gx[i] += go[i] * (1.0 - y * y);
        }
    };
    return result;
}

Tensor Tape::log(const Tensor& x) {
    check_same_tape(x);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(x.data()[i]);
    if (!x.requires_grad()) return Tensor(x.shape(), std::move(out));

    auto xd = x.data_;
    const int xn = x.node_;
    return attach(x.shape(), std::move(out),
                  [xd, xn](Tape& tp, const std::vector<double>& go) {
                      auto& gx = tp.adjoint(xn);
                      for (std::size_t i = 0; i < go.size(); ++i) gx[i] += go[i] / (*xd)[i];
                  });
}

Tensor Tape::scale(const Tensor& x, double c) {
    check_same_tape(x);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * x.data()[i];
    if (!x.requires_grad()) return Tensor(x.shape(), std::move(out));

    const int xn = x.node_;
    return attach(x.shape(), std::move(out),
                  [c, xn](Tape& tp, const std::vector<double>& go) {
                      auto& gx = tp.adjoint(xn);
                      for (std::size_t i = 0; i < go.size(); ++i) gx[i] += c * go[i];
                  });
}

Tensor Tape::softmax(const Tensor& x, const std::vector<bool>* keep_mask) {
    check_same_tape(x);
    if (x.rank() != 1 || x.size() == 0) {
        throw ShapeError("softmax: expected non-empty vector, got " + x.shape_str());
    }
    const std::size_t n = x.size();
    if (keep_mask && keep_mask->size() != n) {
        throw ShapeError("softmax: mask length " + std::to_string(keep_mask->size()) +
                         " does not match input length " + std::to_string(n));
    }
    auto kept = [&](std::size_t i) { return !keep_mask || (*keep_mask)[i]; };

    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        if (kept(i)) mx = std::max(mx, x.data()[i]);
    }
    if (!std::isfinite(mx)) throw MaskError("softmax: every position is masked");

    std::vector<double> out(n, 0.0);
    double denom = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!kept(i)) continue;
        out[i] = std::exp(x.data()[i] - mx);
        denom += out[i];
    }
    for (std::size_t i = 0; i < n; ++i) out[i] /= denom;
    if (!x.requires_grad()) return Tensor({n}, std::move(out));

    Tensor result = attach({n}, std::move(out), {});
    auto yd = result.data_;
    const int xn = x.node_;
    nodes_.back().back = [yd, xn](Tape& tp, const std::vector<double>& go) {
        auto& gx = tp.adjoint(xn);
        double dot = 0.0;
        for (std::size_t i = 0; i < go.size(); ++i) dot += go[i] * (*yd)[i];
        for (std::size_t i = 0; i < go.size(); ++i) {
            // Masked positions have y == 0, so they receive zero gradient.
            gx[i] += (*yd)[i] * (go[i] - dot);
        }
    };
    return result;
}

Tensor Tape::inner(const Tensor& a, const Tensor& b) {
    check_same_tape(a);
    check_same_tape(b);
    if (a.rank() != 1 || b.rank() != 1 || a.size() != b.size()) {
        throw ShapeError("inner: " + a.shape_str() + " . " + b.shape_str());
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a.data()[i] * b.data()[i];
    if (!a.requires_grad() && !b.requires_grad()) return Tensor({}, {acc});

    auto ad = a.data_, bd = b.data_;
    const int an = a.node_, bn = b.node_;
    return attach({}, {acc}, [ad, bd, an, bn](Tape& tp, const std::vector<double>& go) {
        const double g = go[0];
        if (an >= 0) {
            auto& ga = tp.adjoint(an);
            for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g * (*bd)[i];
        }
        if (bn >= 0) {
            auto& gb = tp.adjoint(bn);
            for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g * (*ad)[i];
        }
    });
}

Tensor Tape::sum(const Tensor& x) {
    check_same_tape(x);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x.data()[i];
    if (!x.requires_grad()) return Tensor({}, {acc});

    const int xn = x.node_;
    return attach({}, {acc}, [xn](Tape& tp, const std::vector<double>& go) {
        auto& gx = tp.adjoint(xn);
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += go[0];
    });
}

Tensor Tape::pick(const Tensor& v, std::size_t i) {
    check_same_tape(v);
    if (v.rank() != 1 || i >= v.size()) {
        throw ContractError("pick: index " + std::to_string(i) + " out of range for " +
                            v.shape_str());
    }
    if (!v.requires_grad()) return Tensor({}, {v.data()[i]});

    const int vn = v.node_;
    return attach({}, {v.data()[i]}, [vn, i](Tape& tp, const std::vector<double>& go) {
        tp.adjoint(vn)[i] += go[0];
    });
}

Tensor Tape::concat(const Tensor& a, const Tensor& b) {
    check_same_tape(a);
    check_same_tape(b);
    if (a.rank() != 1 || b.rank() != 1) {
        throw ShapeError("concat: " + a.shape_str() + " ++ " + b.shape_str());
    }
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.data(), a.data() + a.size());
    out.insert(out.end(), b.data(), b.data() + b.size());
    if (!a.requires_grad() && !b.requires_grad())
        return Tensor({a.size() + b.size()}, std::move(out));

    const int an = a.node_, bn = b.node_;
    const std::size_t asize = a.size();
    return attach({a.size() + b.size()}, std::move(out),
                  [an, bn, asize](Tape& tp, const std::vector<double>& go) {
                      if (an >= 0) {
                          auto& ga = tp.adjoint(an);
                          for (std::size_t i = 0; i < asize; ++i) ga[i] += go[i];
                      }
                      if (bn >= 0) {
                          auto& gb = tp.adjoint(bn);
                          for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += go[asize + i];
                      }
                  });
}

Tensor Tape::concat_rows(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw ContractError("concat_rows: no inputs");
    const std::size_t c = parts.front().cols();
    std::size_t total = 0;
    bool tracked = false;
    for (const auto& p : parts) {
        check_same_tape(p);
        if (p.rank() != 2 || p.cols() != c) {
            throw ShapeError("concat_rows: inconsistent shape " + p.shape_str());
        }
        total += p.rows();
        tracked = tracked || p.requires_grad();
    }
    std::vector<double> out;
    out.reserve(total * c);
    for (const auto& p : parts) out.insert(out.end(), p.data(), p.data() + p.size());
    if (!tracked) return Tensor({total, c}, std::move(out));

    std::vector<int> ns;
    std::vector<std::size_t> sizes;
    for (const auto& p : parts) {
        ns.push_back(p.node_);
        sizes.push_back(p.size());
    }
    return attach({total, c}, std::move(out),
                  [ns, sizes](Tape& tp, const std::vector<double>& go) {
                      std::size_t off = 0;
                      for (std::size_t k = 0; k < ns.size(); ++k) {
                          if (ns[k] >= 0) {
                              auto& g = tp.adjoint(ns[k]);
                              for (std::size_t i = 0; i < sizes[k]; ++i) g[i] += go[off + i];
                          }
                          off += sizes[k];
                      }
                  });
}

Tensor Tape::concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw ContractError("concat_cols: no inputs");
    const std::size_t r = parts.front().rows();
    std::size_t total_c = 0;
    bool tracked = false;
    for (const auto& p : parts) {
        check_same_tape(p);
        if (p.rank() != 2 || p.rows() != r) {
            throw ShapeError("concat_cols: inconsistent shape " + p.shape_str());
        }
        total_c += p.cols();
        tracked = tracked || p.requires_grad();
    }
    std::vector<double> out(r * total_c);
    {
        std::size_t coff = 0;
        for (const auto& p : parts) {
            const std::size_t pc = p.cols();
            for (std::size_t i = 0; i < r; ++i) {
                std::copy(p.data() + i * pc, p.data() + (i + 1) * pc,
                          out.data() + i * total_c + coff);
            }
            coff += pc;
        }
    }
    if (!tracked) return Tensor({r, total_c}, std::move(out));

    std::vector<int> ns;
    std::vector<std::size_t> widths;
    for (const auto& p : parts) {
        ns.push_back(p.node_);
        widths.push_back(p.cols());
    }
    return attach({r, total_c}, std::move(out),
                  [r, total_c, ns, widths](Tape& tp, const std::vector<double>& go) {
                      std::size_t coff = 0;
                      for (std::size_t k = 0; k < ns.size(); ++k) {
                          const std::size_t w = widths[k];
                          if (ns[k] >= 0) {
                              auto& g = tp.adjoint(ns[k]);
                              for (std::size_t i = 0; i < r; ++i)
                                  for (std::size_t j = 0; j < w; ++j)
                                      g[i * w + j] += go[i * total_c + coff + j];
                          }
                          coff += w;
                      }
                  });
}

Tensor Tape::stack_rows(const std::vector<Tensor>& rows) {
    if (rows.empty()) throw ContractError("stack_rows: no inputs");
    const std::size_t d = rows.front().size();
    bool tracked = false;
    for (const auto& v : rows) {
        check_same_tape(v);
        if (v.rank() != 1 || v.size() != d) {
            throw ShapeError("stack_rows: inconsistent shape " + v.shape_str());
        }
        tracked = tracked || v.requires_grad();
    }
    std::vector<double> out;
    out.reserve(rows.size() * d);
    for (const auto& v : rows) out.insert(out.end(), v.data(), v.data() + d);
    if (!tracked) return Tensor({rows.size(), d}, std::move(out));

    std::vector<int> ns;
    for (const auto& v : rows) ns.push_back(v.node_);
    return attach({rows.size(), d}, std::move(out),
                  [ns, d](Tape& tp, const std::vector<double>& go) {
                      for (std::size_t t = 0; t < ns.size(); ++t) {
                          if (ns[t] < 0) continue;
                          auto& g = tp.adjoint(ns[t]);
                          for (std::size_t j = 0; j < d; ++j) g[j] += go[t * d + j];
                      }
                  });
}

Tensor Tape::stack_scalars(const std::vector<Tensor>& xs) {
    if (xs.empty()) throw ContractError("stack_scalars: no inputs");
    std::vector<double> out;
    out.reserve(xs.size());
    bool tracked = false;
    for (const auto& s : xs) {
        check_same_tape(s);
        if (s.size() != 1) {
            throw ShapeError("stack_scalars: non-scalar input " + s.shape_str());
        }
        out.push_back(s.data()[0]);
        tracked = tracked || s.requires_grad();
    }
    if (!tracked) return Tensor({xs.size()}, std::move(out));

    std::vector<int> ns;
    for (const auto& s : xs) ns.push_back(s.node_);
    return attach({xs.size()}, std::move(out),
                  [ns](Tape& tp, const std::vector<double>& go) {
                      for (std::size_t t = 0; t < ns.size(); ++t) {
                          if (ns[t] >= 0) tp.adjoint(ns[t])[0] += go[t];
                      }
                  });
}

Tensor Tape::row_of(const Tensor& m, std::size_t r) {
    check_same_tape(m);
    if (m.rank() != 2 || r >= m.rows()) {
        throw ContractError("row_of: row " + std::to_string(r) + " out of range for " +
                            m.shape_str());
    }
    const std::size_t c = m.cols();
    std::vector<double> out(m.data() + r * c, m.data() + (r + 1) * c);
    if (!m.requires_grad()) return Tensor({c}, std::move(out));

    const int mn = m.node_;
    return attach({c}, std::move(out),
                  [mn, r, c](Tape& tp, const std::vector<double>& go) {
                      auto& gm = tp.adjoint(mn);
                      for (std::size_t j = 0; j < c; ++j) gm[r * c + j] += go[j];
                  });
}

Tensor Tape::slice_rows(const Tensor& m, std::size_t begin, std::size_t end) {
    check_same_tape(m);
    if (m.rank() != 2 || begin > end || end > m.rows()) {
        throw ContractError("slice_rows: [" + std::to_string(begin) + "," +
                            std::to_string(end) + ") out of range for " + m.shape_str());
    }
    const std::size_t c = m.cols();
    std::vector<double> out(m.data() + begin * c, m.data() + end * c);
    if (!m.requires_grad()) return Tensor({end - begin, c}, std::move(out));

    const int mn = m.node_;
    return attach({end - begin, c}, std::move(out),
                  [mn, begin, c](Tape& tp, const std::vector<double>& go) {
                      auto& gm = tp.adjoint(mn);
                      for (std::size_t i = 0; i < go.size(); ++i) gm[begin * c + i] += go[i];
                  });
}

Tensor Tape::row_scale(const Tensor& m, const Tensor& s) {
    check_same_tape(m);
    check_same_tape(s);
    if (m.rank() != 2 || s.rank() != 1 || m.rows() != s.size()) {
        throw ShapeError("row_scale: " + m.shape_str() + " by " + s.shape_str());
    }
    const std::size_t t = m.rows(), c = m.cols();
    std::vector<double> out(t * c);
    for (std::size_t i = 0; i < t; ++i) {
        const double si = s.data()[i];
        for (std::size_t j = 0; j < c; ++j) out[i * c + j] = si * m.data()[i * c + j];
    }
    if (!m.requires_grad() && !s.requires_grad()) return Tensor({t, c}, std::move(out));

    auto md = m.data_, sd = s.data_;
    const int mn = m.node_, sn = s.node_;
    return attach({t, c}, std::move(out),
                  [t, c, md, sd, mn, sn](Tape& tp, const std::vector<double>& go) {
                      if (mn >= 0) {
                          auto& gm = tp.adjoint(mn);
                          for (std::size_t i = 0; i < t; ++i) {
                              const double si = (*sd)[i];
                              for (std::size_t j = 0; j < c; ++j)
                                  gm[i * c + j] += si * go[i * c + j];
                          }
                      }
                      if (sn >= 0) {
                          auto& gs = tp.adjoint(sn);
                          for (std::size_t i = 0; i < t; ++i) {
                              double acc = 0.0;
                              for (std::size_t j = 0; j < c; ++j)
                                  acc += go[i * c + j] * (*md)[i * c + j];
                              gs[i] += acc;
                          }
                      }
                  });
}

Tensor Tape::mean_rows(const Tensor& m) {
    check_same_tape(m);
    if (m.rank() != 2 || m.rows() == 0) {
        throw ShapeError("mean_rows: expected non-empty matrix, got " + m.shape_str());
    }
    const std::size_t t = m.rows(), c = m.cols();
    std::vector<double> out(c, 0.0);
    for (std::size_t i = 0; i < t; ++i)
        for (std::size_t j = 0; j < c; ++j) out[j] += m.data()[i * c + j];
    for (std::size_t j = 0; j < c; ++j) out[j] /= static_cast<double>(t);
    if (!m.requires_grad()) return Tensor({c}, std::move(out));

    const int mn = m.node_;
    return attach({c}, std::move(out),
                  [mn, t, c](Tape& tp, const std::vector<double>& go) {
                      auto& gm = tp.adjoint(mn);
                      const double inv = 1.0 / static_cast<double>(t);
                      for (std::size_t i = 0; i < t; ++i)
                          for (std::size_t j = 0; j < c; ++j) gm[i * c + j] += go[j] * inv;
                  });
}

Tensor Tape::gather_rows(const Tensor& table, const std::vector<int>& idx) {
    check_same_tape(table);
    if (table.rank() != 2) {
        throw ShapeError("gather_rows: expected matrix, got " + table.shape_str());
    }
    const std::size_t v = table.rows(), d = table.cols();
    std::vector<double> out(idx.size() * d);
    for (std::size_t t = 0; t < idx.size(); ++t) {
        if (idx[t] < 0 || static_cast<std::size_t>(idx[t]) >= v) {
            throw ContractError("gather_rows: index " + std::to_string(idx[t]) +
                                " out of range for table " + table.shape_str());
        }
        std::copy(table.data() + static_cast<std::size_t>(idx[t]) * d,
                  table.data() + (static_cast<std::size_t>(idx[t]) + 1) * d,
                  out.data() + t * d);
    }
    if (!table.requires_grad()) return Tensor({idx.size(), d}, std::move(out));

    const int tn = table.node_;
    return attach({idx.size(), d}, std::move(out),
                  [tn, idx, d](Tape& tp, const std::vector<double>& go) {
                      auto& gt = tp.adjoint(tn);
                      for (std::size_t t = 0; t < idx.size(); ++t) {
                          double* grow = gt.data() + static_cast<std::size_t>(idx[t]) * d;
                          for (std::size_t j = 0; j < d; ++j) grow[j] += go[t * d + j];
                      }
                  });
}

}  // namespace awblstm
