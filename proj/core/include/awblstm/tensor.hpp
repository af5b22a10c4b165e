#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace awblstm {

class Tape;

/// Dense multi-dimensional array of doubles.
///
/// Values are immutable once an operation has consumed them; the data buffer
/// is shared, so copies are cheap. A tensor produced by (or registered with)
/// a Tape carries a node id and participates in reverse-mode differentiation.
/// Scalars are rank-0 tensors of size 1.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }
    static Tensor scalar(double v) { return Tensor({}, {v}); }
    static Tensor row(std::vector<double> data);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_ ? data_->size() : 0; }
    std::size_t rows() const { return shape_.at(0); }
    std::size_t cols() const { return shape_.at(1); }

    double* data() { return data_->data(); }
    const double* data() const { return data_->data(); }
    const std::vector<double>& values() const { return *data_; }

    double item() const;
    double operator()(std::size_t i) const { return (*data_)[i]; }
    double& operator()(std::size_t i) { return (*data_)[i]; }
    double operator()(std::size_t i, std::size_t j) const { return (*data_)[i * shape_[1] + j]; }
    double& operator()(std::size_t i, std::size_t j) { return (*data_)[i * shape_[1] + j]; }

    bool requires_grad() const { return node_ >= 0; }
    int node() const { return node_; }
    bool defined() const { return static_cast<bool>(data_); }

    /// True when every element is finite.
    bool all_finite() const;

    std::string shape_str() const;

private:
    friend class Tape;

    std::vector<std::size_t> shape_;
    std::shared_ptr<std::vector<double>> data_;
    Tape* tape_ = nullptr;
    int node_ = -1;
};

/// Record of primitive operations for reverse-mode differentiation.
///
/// Every operation executed through a Tape appends one node whose backward
/// closure scatters the output adjoint onto the inputs. Nodes are stored in
/// execution order, which is a topological order by construction. A Tape is
/// confined to one logical thread; independent tapes may run concurrently.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Register a leaf (typically a parameter). The returned tensor shares
    /// the input's data buffer and is tracked by this tape.
    Tensor watch(const Tensor& t);

    // --- primitive operations -------------------------------------------

    /// [m,k] x [k,n] -> [m,n]
    Tensor matmul(const Tensor& a, const Tensor& b);
    /// [m,k] x [k] -> [m]
    Tensor matvec(const Tensor& m, const Tensor& v);
    /// [t] x [t,n] -> [n]  (weighted sum of the matrix rows)
    Tensor vecmat(const Tensor& v, const Tensor& m);

    /// Same-shape addition, or [m,n] + [n] bias added to every row.
    Tensor add(const Tensor& a, const Tensor& b);
    /// Pointwise multiplication; shapes must agree.
    Tensor mul(const Tensor& a, const Tensor& b);
    Tensor sigmoid(const Tensor& x);
    Tensor tanh(const Tensor& x);
    /// Pointwise natural log; domain x > 0.
    Tensor log(const Tensor& x);
    /// Multiply by a compile-time-known constant.
    Tensor scale(const Tensor& x, double c);

    /// Numerically stabilized softmax over a vector, optionally masked.
    /// Masked positions (mask[i] == false) are exactly zero in the output.
    Tensor softmax(const Tensor& x, const std::vector<bool>* keep_mask = nullptr);

    /// Inner product of two equal-length vectors -> scalar.
    Tensor inner(const Tensor& a, const Tensor& b);
    /// Sum of all elements -> scalar.
    Tensor sum(const Tensor& x);
    /// Element i of a vector -> scalar.
    Tensor pick(const Tensor& v, std::size_t i);

    /// Concatenate two vectors.
    Tensor concat(const Tensor& a, const Tensor& b);
    /// Stack equal-width matrices along the row (time) axis.
    Tensor concat_rows(const std::vector<Tensor>& parts);
    /// Concatenate equal-height matrices along the column axis.
    Tensor concat_cols(const std::vector<Tensor>& parts);
    /// Stack T vectors of width d into a [T,d] matrix.
    Tensor stack_rows(const std::vector<Tensor>& rows);
    /// Stack T scalars into a [T] vector.
    Tensor stack_scalars(const std::vector<Tensor>& xs);

    /// Row r of a matrix as a vector.
    Tensor row_of(const Tensor& m, std::size_t r);
    /// Rows [begin, end) of a matrix.
    Tensor slice_rows(const Tensor& m, std::size_t begin, std::size_t end);
    /// Scale row t of m by s[t].
    Tensor row_scale(const Tensor& m, const Tensor& s);
    /// Mean over rows -> [d].
    Tensor mean_rows(const Tensor& m);
    /// Gather table rows by index -> [idx.size(), d].
    Tensor gather_rows(const Tensor& table, const std::vector<int>& idx);

    // --- reverse pass ----------------------------------------------------

    /// Propagate adjoints from a scalar loss back to every tracked tensor.
    void backward(const Tensor& loss);

    /// Adjoint of a tracked tensor after backward(); zeros if untouched.
    const std::vector<double>& grad(const Tensor& t) const;

    std::size_t node_count() const { return nodes_.size(); }

    /// Drop all nodes and adjoints so the tape can be reused.
    void clear();

private:
    // A node's backward closure receives the tape and the node's own output
    // adjoint, and accumulates into input adjoints via Tape::adjoint().
    using BackFn = std::function<void(Tape&, const std::vector<double>&)>;

    struct Node {
        BackFn back;  // empty for leaves
        std::size_t out_size = 0;
    };

    Tensor attach(std::vector<std::size_t> shape, std::vector<double> data, BackFn back);
    void check_same_tape(const Tensor& t) const;
    std::vector<double>& adjoint(int node);

    std::vector<Node> nodes_;
    std::vector<std::vector<double>> adjoints_;
};

}  // namespace awblstm
