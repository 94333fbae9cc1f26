#include "gdm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gdm/errors.hpp"

namespace gdm::linalg {

bool DenseVector::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  require(data_.size() == rows * cols, "DenseMatrix: entry count " + std::to_string(data_.size()) +
                                           " does not match " + std::to_string(rows) + "x" +
                                           std::to_string(cols));
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    require(r.size() == cols_, "DenseMatrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseVector DenseMatrix::column(std::size_t j) const {
  require(j < cols_, "DenseMatrix::column: index out of range");
  DenseVector out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

bool DenseMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot: length mismatch");
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

DenseVector multiply(const DenseMatrix& a, std::span<const double> x) {
  require(a.cols() == x.size(), "multiply: dimension mismatch");
  DenseVector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = dot(a.row(i), x);
  return out;
}

DenseVector multiply_transpose(const DenseMatrix& a, std::span<const double> v) {
  require(a.rows() == v.size(), "multiply_transpose: dimension mismatch");
  DenseVector out(a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double vi = v[i];
    if (vi == 0.0) continue;
    const auto row = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += vi * row[j];
  }
  return out;
}

DenseMatrix select_columns(const DenseMatrix& a, std::span<const std::size_t> columns) {
  DenseMatrix out(a.rows(), columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c)
    require(columns[c] < a.cols(), "select_columns: column index out of range");
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto src = a.row(i);
    auto dst = out.row(i);
    for (std::size_t c = 0; c < columns.size(); ++c) dst[c] = src[columns[c]];
  }
  return out;
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

namespace {

// Householder QR on a column-major buffer, LAPACK-style compact storage:
// R in the upper triangle, reflector tails below the diagonal (implicit 1 on
// the diagonal), scalar factors in tau.
class HouseholderQr {
 public:
  HouseholderQr(std::size_t m, std::size_t n, std::vector<double> col_major, bool pivot)
      : m_(m), n_(n), a_(std::move(col_major)), tau_(std::min(m, n), 0.0), perm_(n) {
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    factor(pivot);
  }

  std::size_t steps() const { return tau_.size(); }
  double r(std::size_t i, std::size_t j) const { return a_[j * m_ + i]; }
  const std::vector<std::size_t>& permutation() const { return perm_; }

  // b <- Q^T b
  void apply_qt(std::span<double> b) const {
    for (std::size_t k = 0; k < steps(); ++k) reflect(k, b);
  }
  // b <- Q b
  void apply_q(std::span<double> b) const {
    for (std::size_t k = steps(); k-- > 0;) reflect(k, b);
  }

 private:
  double& at(std::size_t i, std::size_t j) { return a_[j * m_ + i]; }

  void reflect(std::size_t k, std::span<double> b) const {
    if (tau_[k] == 0.0) return;
    const double* v = &a_[k * m_];
    double s = b[k];
    for (std::size_t i = k + 1; i < m_; ++i) s += v[i] * b[i];
    s *= tau_[k];
    b[k] -= s;
    for (std::size_t i = k + 1; i < m_; ++i) b[i] -= s * v[i];
  }

  void factor(bool pivot) {
    for (std::size_t k = 0; k < steps(); ++k) {
      if (pivot) {
        std::size_t best = k;
        double best_norm = -1.0;
        for (std::size_t j = k; j < n_; ++j) {
          double s = 0.0;
          for (std::size_t i = k; i < m_; ++i) s += at(i, j) * at(i, j);
          if (s > best_norm) {
            best_norm = s;
            best = j;
          }
        }
        if (best != k) {
          std::swap_ranges(a_.begin() + static_cast<std::ptrdiff_t>(k * m_),
                           a_.begin() + static_cast<std::ptrdiff_t>((k + 1) * m_),
                           a_.begin() + static_cast<std::ptrdiff_t>(best * m_));
          std::swap(perm_[k], perm_[best]);
        }
      }

      double tail = 0.0;
      for (std::size_t i = k + 1; i < m_; ++i) tail += at(i, k) * at(i, k);
      const double x0 = at(k, k);
      if (tail == 0.0) {
        tau_[k] = 0.0;
        continue;
      }
      const double norm = std::sqrt(x0 * x0 + tail);
      const double beta = x0 >= 0.0 ? -norm : norm;
      tau_[k] = (beta - x0) / beta;
      const double scale = 1.0 / (x0 - beta);
      for (std::size_t i = k + 1; i < m_; ++i) at(i, k) *= scale;
      at(k, k) = beta;

      const double* v = &a_[k * m_];
      for (std::size_t j = k + 1; j < n_; ++j) {
        double* col = &a_[j * m_];
        double s = col[k];
        for (std::size_t i = k + 1; i < m_; ++i) s += v[i] * col[i];
        s *= tau_[k];
        col[k] -= s;
        for (std::size_t i = k + 1; i < m_; ++i) col[i] -= s * v[i];
      }
    }
  }

  std::size_t m_;
  std::size_t n_;
  std::vector<double> a_;
  std::vector<double> tau_;
  std::vector<std::size_t> perm_;
};

std::vector<double> to_column_major(const DenseMatrix& a) {
  std::vector<double> out(a.rows() * a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[j * a.rows() + i] = a(i, j);
  return out;
}

constexpr double kRankTolerance = 1e-10;

}  // namespace

DenseVector solve_least_squares(const DenseMatrix& a, std::span<const double> b) {
  require(a.rows() == b.size(), "solve_least_squares: A has " + std::to_string(a.rows()) +
                                    " rows but b has length " + std::to_string(b.size()));
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  DenseVector x(n);
  if (m == 0 || n == 0) return x;

  const HouseholderQr qr(m, n, to_column_major(a), /*pivot=*/true);
  std::vector<double> c(b.begin(), b.end());
  qr.apply_qt(c);

  const double lead = std::abs(qr.r(0, 0));
  std::size_t rank = 0;
  while (rank < qr.steps() && lead > 0.0 && std::abs(qr.r(rank, rank)) > kRankTolerance * lead) ++rank;
  if (rank == 0) return x;

  std::vector<double> z(n, 0.0);
  if (rank == n) {
    for (std::size_t i = n; i-- > 0;) {
      double s = c[i];
      for (std::size_t j = i + 1; j < n; ++j) s -= qr.r(i, j) * z[j];
      z[i] = s / qr.r(i, i);
    }
  } else {
    // Minimum-norm solution of [R11 R12] z = c1 through a QR of its transpose.
    std::vector<double> t(n * rank);  // column-major n x rank
    for (std::size_t i = 0; i < rank; ++i)
      for (std::size_t j = i; j < n; ++j) t[i * n + j] = qr.r(i, j);
    const HouseholderQr lq(n, rank, std::move(t), /*pivot=*/false);
    // R2^T u = c1
    for (std::size_t i = 0; i < rank; ++i) {
      double s = c[i];
      for (std::size_t j = 0; j < i; ++j) s -= lq.r(j, i) * z[j];
      z[i] = s / lq.r(i, i);
    }
    lq.apply_q(z);
  }

  const auto& perm = qr.permutation();
  for (std::size_t i = 0; i < n; ++i) x[perm[i]] = z[i];
  return x;
}

SingularValueRange singular_value_extremes(const DenseMatrix& a) {
  require(!a.empty(), "singular_value_extremes: empty matrix");
  const bool wide = a.rows() < a.cols();
  const DenseMatrix tall = wide ? transpose(a) : a;
  const std::size_t m = tall.rows();
  const std::size_t n = tall.cols();
  std::vector<double> u = to_column_major(tall);

  // One-sided Jacobi: rotate column pairs until mutually orthogonal.
  constexpr int kMaxSweeps = 80;
  const double eps = 1e-15;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double* cp = &u[p * m];
        double* cq = &u[q * m];
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += cp[i] * cp[i];
          beta += cq[i] * cq[i];
          gamma += cp[i] * cq[i];
        }
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = cp[i];
          const double y = cq[i];
          cp[i] = c * x - s * y;
          cq[i] = s * x + c * y;
        }
      }
    }
    if (!rotated) break;
  }

  SingularValueRange out{std::numeric_limits<double>::infinity(), 0.0};
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += u[j * m + i] * u[j * m + i];
    const double sigma = std::sqrt(s);
    out.min = std::min(out.min, sigma);
    out.max = std::max(out.max, sigma);
  }
  if (wide) out.min = 0.0;
  return out;
}

}  // namespace gdm::linalg
