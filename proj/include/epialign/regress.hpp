#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace epialign::regress {

/// Dense row-major matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    /// Throws ContractError on ragged input.
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    void append_row(std::span<const double> values);
    Matrix select_rows(std::span<const std::size_t> indices) const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

enum class KernelKind : std::uint8_t { linear, polynomial, rbf, sigmoid };

std::string_view to_string(KernelKind kind);
KernelKind parse_kernel_kind(std::string_view name);

struct KernelParams {
    KernelKind kind = KernelKind::rbf;
    /// nullopt is the `scale` sentinel, resolved at fit time.
    std::optional<double> gamma;
    double coef0 = 0.0;
    int degree = 3;

    void validate() const;
    friend bool operator==(const KernelParams&, const KernelParams&) = default;
};

/// linear: x.y; polynomial: (g x.y + c0)^deg; rbf: exp(-g |x-y|^2);
/// sigmoid: tanh(g x.y + c0). Non-linear kinds need a resolved gamma.
double kernel_eval(const KernelParams& k, std::span<const double> x, std::span<const double> y);

struct SvrParams {
    double C = 1.0;
    double epsilon = 0.1;
    double tol = 1e-3;
    /// Cap on SMO pair updates; nullopt means 10000 * n.
    std::optional<std::size_t> max_passes;
    KernelParams kernel;
    /// Recorded for reproducibility; working-set selection breaks ties by
    /// lowest index and does not consume randomness.
    std::uint64_t seed = 0;

    void validate() const;
    friend bool operator==(const SvrParams&, const SvrParams&) = default;
};

/// Per-feature and target standardization with population statistics.
/// Zero-variance columns (and a constant target) keep scale 1.
struct Scaler {
    std::vector<double> means;
    std::vector<double> scales;
    double target_mean = 0.0;
    double target_scale = 1.0;

    std::vector<double> apply(std::span<const double> x) const;
    Matrix apply(const Matrix& X) const;
    double apply_target(double y) const { return (y - target_mean) / target_scale; }
    double invert_target(double y_std) const { return y_std * target_scale + target_mean; }

    friend bool operator==(const Scaler&, const Scaler&) = default;
};

/// Throws ContractError on empty or non-finite input, or when y's length
/// differs from X's row count.
Scaler fit_scaler(const Matrix& X, std::span<const double> y);

struct SvrModel {
    Matrix support_vectors;                  // standardized inputs
    std::vector<double> dual_coefs;          // alpha_i - alpha*_i
    std::vector<std::size_t> support_index;  // training row of each support vector
    double bias = 0.0;
    SvrParams params;                        // gamma resolved
    Scaler scaler;
    bool converged = false;
    std::size_t iterations = 0;
    /// Final maximal KKT violation (m - M gap) on standardized data.
    double kkt_violation = 0.0;

    std::size_t n_features() const { return scaler.means.size(); }
};

struct FitTrace {
    /// Dual objective (maximization form) after each pair update.
    std::vector<double> dual_objective;
};

/// Fits an epsilon-SVR by SMO with second-order working-set selection on
/// standardized X and y.
SvrModel svr_fit(const Matrix& X, std::span<const double> y, const SvrParams& params, FitTrace* trace = nullptr);

/// Prediction in the original target units.
double svr_predict(const SvrModel& model, std::span<const double> x);

/// Decision value in standardized target units (before invert_target).
double svr_decision(const SvrModel& model, std::span<const double> x_standardized);

/// Objective of the dual in maximization form for coefficients beta = a - a*
/// (with a * a* = 0): -1/2 b'Kb - eps |b|_1 + y'b.
double dual_objective(const Matrix& X_std, std::span<const double> y_std, std::span<const double> beta,
                      const KernelParams& kernel, double epsilon);

struct GridScore {
    SvrParams params;
    std::optional<double> spearman;
    bool converged = false;
};

struct GridSearchResult {
    SvrParams best;
    std::vector<GridScore> scores;  // in candidate order
};

struct ValidationSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

/// Fits every candidate on the training rows and keeps the one with the
/// highest validation Spearman. Ties: smaller C, then smaller degree, then
/// earlier position in the candidate list. Undefined correlations rank last.
/// Throws DegenerateDataError when validation targets are all equal.
GridSearchResult grid_search(const Matrix& X, std::span<const double> y, std::span<const SvrParams> candidates,
                             const ValidationSplit& split);

inline constexpr int kModelFormatVersion = 1;

void save_model(const SvrModel& model, std::ostream& out);
/// Throws FormatError naming a missing/invalid field, or
/// UnsupportedVersionError for an unknown version.
SvrModel load_model(std::istream& in);

}  // namespace epialign::regress
