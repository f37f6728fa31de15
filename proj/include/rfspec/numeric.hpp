#pragma once

// Dense complex linear algebra and quadrature shared by the spectrum,
// superoperator and simulation modules. Matrices here are small (at most a
// few hundred rows), so everything is dense and single-threaded.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace rfspec {

using complex = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr complex I{0.0, 1.0};

/// Largest dimension accepted by the dense kernels.
inline constexpr std::size_t max_dense_dim = 256;

class ComplexVector {
  public:
    ComplexVector() = default;
    explicit ComplexVector(std::size_t n) : data_(n) {}
    ComplexVector(std::initializer_list<complex> values) : data_(values) {}
    explicit ComplexVector(std::vector<complex> values)
        : data_(std::move(values)) {}

    static ComplexVector unit(std::size_t n, std::size_t k) {
        ComplexVector v(n);
        v[k] = 1.0;
        return v;
    }

    std::size_t size() const noexcept { return data_.size(); }
    complex &operator[](std::size_t i) { return data_[i]; }
    const complex &operator[](std::size_t i) const { return data_[i]; }
    auto begin() noexcept { return data_.begin(); }
    auto end() noexcept { return data_.end(); }
    auto begin() const noexcept { return data_.begin(); }
    auto end() const noexcept { return data_.end(); }
    const std::vector<complex> &values() const noexcept { return data_; }

    double norm_inf() const {
        double r = 0.0;
        for (const auto &z : data_)
            r = std::max(r, std::abs(z));
        return r;
    }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](complex z) {
            return std::isfinite(z.real()) && std::isfinite(z.imag());
        });
    }

    ComplexVector &operator+=(const ComplexVector &o) {
        for (std::size_t i = 0; i < size(); ++i)
            data_[i] += o[i];
        return *this;
    }
    ComplexVector &operator-=(const ComplexVector &o) {
        for (std::size_t i = 0; i < size(); ++i)
            data_[i] -= o[i];
        return *this;
    }
    ComplexVector &operator*=(complex s) {
        for (auto &z : data_)
            z *= s;
        return *this;
    }

    friend ComplexVector operator+(ComplexVector a, const ComplexVector &b) {
        return a += b;
    }
    friend ComplexVector operator-(ComplexVector a, const ComplexVector &b) {
        return a -= b;
    }
    friend ComplexVector operator*(complex s, ComplexVector a) {
        return a *= s;
    }

  private:
    std::vector<complex> data_;
};

/// Dense row-major complex matrix with dimensions fixed at construction.
class ComplexMatrix {
  public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols) {}
    ComplexMatrix(std::initializer_list<std::initializer_list<complex>> rows)
        : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
        data_.reserve(rows_ * cols_);
        for (const auto &r : rows) {
            if (r.size() != cols_)
                throw InvalidInput("ragged matrix initializer");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = 1.0;
        return m;
    }
    static ComplexMatrix diagonal(const std::vector<complex> &d) {
        ComplexMatrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i)
            m(i, i) = d[i];
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    complex &operator()(std::size_t i, std::size_t j) {
        return data_[i * cols_ + j];
    }
    const complex &operator()(std::size_t i, std::size_t j) const {
        return data_[i * cols_ + j];
    }

    ComplexMatrix adjoint() const {
        ComplexMatrix r(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                r(j, i) = std::conj((*this)(i, j));
        return r;
    }

    complex trace() const {
        complex t = 0.0;
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i)
            t += (*this)(i, i);
        return t;
    }

    /// Maximum absolute column sum.
    double norm1() const {
        double best = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < rows_; ++i)
                s += std::abs((*this)(i, j));
            best = std::max(best, s);
        }
        return best;
    }

    /// Maximum absolute row sum.
    double norm_inf() const {
        double best = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < cols_; ++j)
                s += std::abs((*this)(i, j));
            best = std::max(best, s);
        }
        return best;
    }

    double max_abs() const {
        double r = 0.0;
        for (const auto &z : data_)
            r = std::max(r, std::abs(z));
        return r;
    }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](complex z) {
            return std::isfinite(z.real()) && std::isfinite(z.imag());
        });
    }

    ComplexMatrix &operator+=(const ComplexMatrix &o) {
        check_same_shape(o);
        for (std::size_t k = 0; k < data_.size(); ++k)
            data_[k] += o.data_[k];
        return *this;
    }
    ComplexMatrix &operator-=(const ComplexMatrix &o) {
        check_same_shape(o);
        for (std::size_t k = 0; k < data_.size(); ++k)
            data_[k] -= o.data_[k];
        return *this;
    }
    ComplexMatrix &operator*=(complex s) {
        for (auto &z : data_)
            z *= s;
        return *this;
    }

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix &b) {
        return a += b;
    }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix &b) {
        return a -= b;
    }
    friend ComplexMatrix operator*(complex s, ComplexMatrix a) {
        return a *= s;
    }
    friend ComplexMatrix operator*(ComplexMatrix a, complex s) {
        return a *= s;
    }

    friend ComplexMatrix operator*(const ComplexMatrix &a,
                                   const ComplexMatrix &b) {
        if (a.cols_ != b.rows_)
            throw InvalidInput("matrix product shape mismatch");
        ComplexMatrix r(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const complex aik = a(i, k);
                if (aik == complex{})
                    continue;
                for (std::size_t j = 0; j < b.cols_; ++j)
                    r(i, j) += aik * b(k, j);
            }
        return r;
    }

    friend ComplexVector operator*(const ComplexMatrix &a,
                                   const ComplexVector &x) {
        if (a.cols_ != x.size())
            throw InvalidInput("matrix-vector shape mismatch");
        ComplexVector r(a.rows_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            complex s = 0.0;
            for (std::size_t j = 0; j < a.cols_; ++j)
                s += a(i, j) * x[j];
            r[i] = s;
        }
        return r;
    }

  private:
    void check_same_shape(const ComplexMatrix &o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw InvalidInput("matrix shape mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<complex> data_;
};

inline ComplexMatrix kron(const ComplexMatrix &a, const ComplexMatrix &b) {
    ComplexMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    r(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    return r;
}

namespace detail {

inline void require_square(const ComplexMatrix &a, const char *what) {
    if (!a.square() || a.rows() == 0)
        throw InvalidInput(std::string(what) + ": matrix must be square");
    if (a.rows() > max_dense_dim)
        throw InvalidInput(std::string(what) + ": dimension too large");
}

inline Eigen::MatrixXcd to_eigen(const ComplexMatrix &a) {
    Eigen::MatrixXcd m(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                a(i, j);
    return m;
}

} // namespace detail

/// LU factorization with partial pivoting. The pivot is the entry of largest
/// modulus in the column; ties go to the lowest row index.
class LuFactorization {
  public:
    explicit LuFactorization(ComplexMatrix a) : lu_(std::move(a)) {
        detail::require_square(lu_, "LU");
        const std::size_t n = lu_.rows();
        const double scale = lu_.norm_inf();
        perm_.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            perm_[i] = i;
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t p = k;
            double best = std::abs(lu_(k, k));
            for (std::size_t i = k + 1; i < n; ++i) {
                const double v = std::abs(lu_(i, k));
                if (v > best) {
                    best = v;
                    p = i;
                }
            }
            if (!(best >= 1e-14 * scale) || best == 0.0)
                throw SingularMatrix("pivot " + std::to_string(best) +
                                     " below 1e-14 * |A| at column " +
                                     std::to_string(k));
            if (p != k) {
                for (std::size_t j = 0; j < n; ++j)
                    std::swap(lu_(k, j), lu_(p, j));
                std::swap(perm_[k], perm_[p]);
            }
            const complex inv = 1.0 / lu_(k, k);
            for (std::size_t i = k + 1; i < n; ++i) {
                const complex f = lu_(i, k) * inv;
                lu_(i, k) = f;
                if (f == complex{})
                    continue;
                for (std::size_t j = k + 1; j < n; ++j)
                    lu_(i, j) -= f * lu_(k, j);
            }
        }
    }

    std::size_t size() const noexcept { return lu_.rows(); }

    ComplexVector solve(const ComplexVector &b) const {
        const std::size_t n = size();
        if (b.size() != n)
            throw InvalidInput("LU solve: right-hand side length mismatch");
        ComplexVector x(n);
        for (std::size_t i = 0; i < n; ++i) {
            complex s = b[perm_[i]];
            for (std::size_t j = 0; j < i; ++j)
                s -= lu_(i, j) * x[j];
            x[i] = s;
        }
        for (std::size_t i = n; i-- > 0;) {
            complex s = x[i];
            for (std::size_t j = i + 1; j < n; ++j)
                s -= lu_(i, j) * x[j];
            x[i] = s / lu_(i, i);
        }
        return x;
    }

    ComplexMatrix solve(const ComplexMatrix &b) const {
        ComplexMatrix x(b.rows(), b.cols());
        ComplexVector col(b.rows());
        for (std::size_t j = 0; j < b.cols(); ++j) {
            for (std::size_t i = 0; i < b.rows(); ++i)
                col[i] = b(i, j);
            const ComplexVector s = solve(col);
            for (std::size_t i = 0; i < b.rows(); ++i)
                x(i, j) = s[i];
        }
        return x;
    }

  private:
    ComplexMatrix lu_;
    std::vector<std::size_t> perm_;
};

/// Solves A x = b by Gaussian elimination with partial pivoting.
inline ComplexVector solve_linear(const ComplexMatrix &a,
                                  const ComplexVector &b) {
    detail::require_square(a, "solve_linear");
    if (!a.all_finite() || !b.all_finite())
        throw InvalidInput("solve_linear: non-finite input");
    return LuFactorization(a).solve(b);
}

/// exp(A t) by scaling and squaring with the [13/13] Pade approximant.
/// Throws Overflow when |A t|_1 exceeds 700; use semigroup() for long
/// horizons of a stable generator.
inline ComplexMatrix mat_exp(const ComplexMatrix &a, double t) {
    detail::require_square(a, "mat_exp");
    if (!(t >= 0.0))
        throw InvalidInput("mat_exp: t must be non-negative");
    const std::size_t n = a.rows();
    ComplexMatrix at = a * complex(t);
    const double norm = at.norm1();
    if (!std::isfinite(norm) || norm > 700.0)
        throw Overflow("|A t|_1 = " + std::to_string(norm) + " exceeds 700");
    if (norm == 0.0)
        return ComplexMatrix::identity(n);

    static constexpr double b[] = {64764752532480000.0,
                                   32382376266240000.0,
                                   7771770303897600.0,
                                   1187353796428800.0,
                                   129060195264000.0,
                                   10559470521600.0,
                                   670442572800.0,
                                   33522128640.0,
                                   1323241920.0,
                                   40840800.0,
                                   960960.0,
                                   16380.0,
                                   182.0,
                                   1.0};
    constexpr double theta13 = 5.371920351148152;

    int squarings = 0;
    if (norm > theta13)
        squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
    at *= complex(std::ldexp(1.0, -squarings));

    const ComplexMatrix id = ComplexMatrix::identity(n);
    const ComplexMatrix a2 = at * at;
    const ComplexMatrix a4 = a2 * a2;
    const ComplexMatrix a6 = a4 * a2;

    ComplexMatrix u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2);
    u_inner += b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
    const ComplexMatrix u = at * u_inner;
    ComplexMatrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2);
    v += b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;

    ComplexMatrix r = LuFactorization(v - u).solve(v + u);
    for (int k = 0; k < squarings; ++k)
        r = r * r;
    if (!r.all_finite())
        throw Overflow("non-finite matrix exponential");
    return r;
}

/// exp(A t) for horizons beyond the mat_exp norm guard: the exponent is split
/// into equal pieces of 1-norm at most 64 and the piece is raised to the
/// required power. Throws Overflow only if the result is not finite.
inline ComplexMatrix semigroup(const ComplexMatrix &a, double t) {
    detail::require_square(a, "semigroup");
    if (!(t >= 0.0))
        throw InvalidInput("semigroup: t must be non-negative");
    const double norm = a.norm1() * t;
    if (norm <= 64.0)
        return mat_exp(a, t);
    const auto pieces = static_cast<unsigned long long>(std::ceil(norm / 64.0));
    ComplexMatrix base = mat_exp(a, t / static_cast<double>(pieces));
    ComplexMatrix result = ComplexMatrix::identity(a.rows());
    for (unsigned long long k = pieces; k > 0; k >>= 1) {
        if (k & 1ULL)
            result = result * base;
        if (k > 1)
            base = base * base;
    }
    if (!result.all_finite())
        throw Overflow("non-finite semigroup at t = " + std::to_string(t));
    return result;
}

/// All eigenvalues, sorted by real part and then imaginary part.
inline std::vector<complex> eigvals(const ComplexMatrix &a) {
    detail::require_square(a, "eigvals");
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(detail::to_eigen(a),
                                                       false);
    if (solver.info() != Eigen::Success)
        throw NoConvergence("eigenvalue iteration did not converge");
    std::vector<complex> out(solver.eigenvalues().begin(),
                             solver.eigenvalues().end());
    std::sort(out.begin(), out.end(), [](complex x, complex y) {
        if (x.real() != y.real())
            return x.real() < y.real();
        return x.imag() < y.imag();
    });
    return out;
}

struct NullVector {
    ComplexVector vector;   ///< right singular vector of the smallest value
    double smallest = 0.0;  ///< smallest singular value
    double next = 0.0;      ///< second smallest singular value
};

/// Approximate one-dimensional null space from the singular value
/// decomposition.
inline NullVector null_vector(const ComplexMatrix &a) {
    detail::require_square(a, "null_vector");
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(detail::to_eigen(a),
                                           Eigen::ComputeFullV);
    const auto &s = svd.singularValues();
    const Eigen::Index n = s.size();
    NullVector out;
    out.smallest = s(n - 1);
    out.next = n > 1 ? s(n - 2) : s(n - 1);
    out.vector = ComplexVector(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        out.vector[static_cast<std::size_t>(i)] = svd.matrixV()(i, n - 1);
    return out;
}

struct QuadratureOptions {
    int min_depth = 4;                 ///< bisections before error control
    int max_depth = 50;
    std::size_t max_intervals = 2'000'000;
};

namespace detail {

template <class F> struct SimpsonState {
    F &f;
    const QuadratureOptions &opts;
    std::size_t intervals = 0;

    double recurse(double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m);
        const double rm = 0.5 * (m + b);
        const double flm = f(lm);
        const double frm = f(rm);
        const double h = b - a;
        const double left = h / 12.0 * (fa + 4.0 * flm + fm);
        const double right = h / 12.0 * (fm + 4.0 * frm + fb);
        const double delta = left + right - whole;
        if (!std::isfinite(delta))
            throw MaxSubdivisions("integrand is not finite near x = " +
                                  std::to_string(m));
        if (depth >= opts.min_depth && std::abs(delta) <= 15.0 * tol)
            return left + right + delta / 15.0;
        if (depth >= opts.max_depth || ++intervals > opts.max_intervals)
            throw MaxSubdivisions("no convergence on [" + std::to_string(a) +
                                  ", " + std::to_string(b) + "]");
        return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
               recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
    }
};

} // namespace detail

/// Adaptive Simpson quadrature with interval bisection and an absolute
/// error target.
template <class F>
double integrate_adaptive(F &&f, double a, double b, double tol,
                          const QuadratureOptions &opts = {}) {
    if (!(a < b))
        throw InvalidInput("integrate_adaptive: need a < b");
    if (!(tol > 0.0))
        throw InvalidInput("integrate_adaptive: need tol > 0");
    detail::SimpsonState<std::remove_reference_t<F>> state{f, opts};
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return state.recurse(a, b, fa, fm, fb, whole, tol, 0);
}

} // namespace rfspec
