#include "epialign/regress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "epialign/error.hpp"
#include "epialign/stats.hpp"

namespace epialign::regress {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m;
    for (const auto& r : rows) {
        m.append_row(r);
    }
    return m;
}

void Matrix::append_row(std::span<const double> values) {
    if (rows_ == 0 && data_.empty()) {
        cols_ = values.size();
    } else if (values.size() != cols_) {
        throw ContractError("matrix row has " + std::to_string(values.size()) + " columns, expected " +
                            std::to_string(cols_));
    }
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
    Matrix out(0, cols_);
    out.data_.reserve(indices.size() * cols_);
    for (std::size_t i : indices) {
        if (i >= rows_) {
            throw ContractError("row index out of range");
        }
        out.data_.insert(out.data_.end(), row(i).begin(), row(i).end());
        ++out.rows_;
    }
    return out;
}

std::string_view to_string(KernelKind kind) {
    switch (kind) {
        case KernelKind::linear: return "linear";
        case KernelKind::polynomial: return "polynomial";
        case KernelKind::rbf: return "rbf";
        case KernelKind::sigmoid: return "sigmoid";
    }
    return "unknown";
}

KernelKind parse_kernel_kind(std::string_view name) {
    if (name == "linear") return KernelKind::linear;
    if (name == "polynomial" || name == "poly") return KernelKind::polynomial;
    if (name == "rbf") return KernelKind::rbf;
    if (name == "sigmoid") return KernelKind::sigmoid;
    throw FormatError("unknown kernel '" + std::string(name) + "' (expected linear, polynomial, rbf or sigmoid)");
}

void KernelParams::validate() const {
    if (gamma && !(*gamma > 0.0 && std::isfinite(*gamma))) {
        throw ContractError("kernel gamma must be positive and finite");
    }
    if (degree < 1) {
        throw ContractError("kernel degree must be at least 1");
    }
    if (!std::isfinite(coef0)) {
        throw ContractError("kernel coef0 must be finite");
    }
}

namespace {

double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += x[i] * y[i];
    }
    return s;
}

}  // namespace

double kernel_eval(const KernelParams& k, std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw ContractError("kernel_eval: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                            std::to_string(y.size()) + ")");
    }
    if (k.kind == KernelKind::linear) {
        return dot(x, y);
    }
    if (!k.gamma) {
        throw ContractError("kernel_eval: gamma is unresolved");
    }
    const double g = *k.gamma;
    switch (k.kind) {
        case KernelKind::polynomial: return std::pow(g * dot(x, y) + k.coef0, k.degree);
        case KernelKind::rbf: {
            double d2 = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double d = x[i] - y[i];
                d2 += d * d;
            }
            return std::exp(-g * d2);
        }
        case KernelKind::sigmoid: return std::tanh(g * dot(x, y) + k.coef0);
        case KernelKind::linear: break;
    }
    return dot(x, y);
}

void SvrParams::validate() const {
    if (!(C > 0.0) || !std::isfinite(C)) {
        throw ContractError("SVR C must be positive");
    }
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
        throw ContractError("SVR epsilon must be nonnegative");
    }
    if (!(tol > 0.0) || !std::isfinite(tol)) {
        throw ContractError("SVR tol must be positive");
    }
    if (max_passes && *max_passes == 0) {
        throw ContractError("SVR max_passes must be positive");
    }
    kernel.validate();
}

// ---------------------------------------------------------------------------
// Scaler

namespace {

// mean = v0 + sum(v - v0)/n keeps constant inputs exact.
double stable_mean(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) {
        acc += x - v[0];
    }
    return v[0] + acc / static_cast<double>(v.size());
}

double population_std(std::span<const double> v, double mean) {
    double acc = 0.0;
    for (double x : v) {
        acc += (x - mean) * (x - mean);
    }
    return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

Scaler fit_scaler(const Matrix& X, std::span<const double> y) {
    if (X.empty()) {
        throw ContractError("fit_scaler: empty X");
    }
    if (y.size() != X.rows()) {
        throw ContractError("fit_scaler: y has " + std::to_string(y.size()) + " entries, X has " +
                            std::to_string(X.rows()) + " rows");
    }
    Scaler s;
    std::vector<double> column(X.rows());
    for (std::size_t j = 0; j < X.cols(); ++j) {
        for (std::size_t i = 0; i < X.rows(); ++i) {
            column[i] = X(i, j);
            if (!std::isfinite(column[i])) {
                throw ContractError("fit_scaler: non-finite feature value");
            }
        }
        const double mean = stable_mean(column);
        const double sd = population_std(column, mean);
        s.means.push_back(mean);
        s.scales.push_back(sd > 0.0 ? sd : 1.0);
    }
    for (double v : y) {
        if (!std::isfinite(v)) {
            throw ContractError("fit_scaler: non-finite target");
        }
    }
    s.target_mean = stable_mean(y);
    const double tsd = population_std(y, s.target_mean);
    s.target_scale = tsd > 0.0 ? tsd : 1.0;
    return s;
}

std::vector<double> Scaler::apply(std::span<const double> x) const {
    if (x.size() != means.size()) {
        throw ContractError("scaler: expected " + std::to_string(means.size()) + " features, got " +
                            std::to_string(x.size()));
    }
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        out[j] = (x[j] - means[j]) / scales[j];
    }
    return out;
}

Matrix Scaler::apply(const Matrix& X) const {
    Matrix out(0, X.cols());
    for (std::size_t i = 0; i < X.rows(); ++i) {
        out.append_row(apply(X.row(i)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// SMO on the 2n-variable form: variables t < n are alpha_t (label +1),
// t >= n are alpha*_{t-n} (label -1). Minimizes 1/2 a'Qa + p'a with
// Q_st = z_s z_t K(s,t), p = [eps - y; eps + y], z'a = 0, 0 <= a <= C.

namespace {

constexpr double kTau = 1e-12;

class SmoSolver {
public:
    SmoSolver(const Matrix& X, std::span<const double> y, const SvrParams& p)
        : n_(X.rows()), C_(p.C), K_(n_ * n_), alpha_(2 * n_, 0.0), grad_(2 * n_), p_(2 * n_) {
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = i; j < n_; ++j) {
                const double k = kernel_eval(p.kernel, X.row(i), X.row(j));
                K_[i * n_ + j] = k;
                K_[j * n_ + i] = k;
            }
        }
        for (std::size_t i = 0; i < n_; ++i) {
            p_[i] = p.epsilon - y[i];
            p_[i + n_] = p.epsilon + y[i];
        }
        grad_ = p_;
    }

    double z(std::size_t t) const { return t < n_ ? 1.0 : -1.0; }
    double kern(std::size_t s, std::size_t t) const { return K_[(s % n_) * n_ + (t % n_)]; }
    double q(std::size_t s, std::size_t t) const { return z(s) * z(t) * kern(s, t); }

    bool upper_bound(std::size_t t) const { return alpha_[t] >= C_; }
    bool lower_bound(std::size_t t) const { return alpha_[t] <= 0.0; }
    bool in_up(std::size_t t) const { return z(t) > 0 ? !upper_bound(t) : !lower_bound(t); }
    bool in_low(std::size_t t) const { return z(t) > 0 ? !lower_bound(t) : !upper_bound(t); }

    /// m(a) - M(a): the maximal KKT violation.
    double violation() const {
        double up = -std::numeric_limits<double>::infinity();
        double low = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < 2 * n_; ++t) {
            const double v = -z(t) * grad_[t];
            if (in_up(t)) up = std::max(up, v);
            if (in_low(t)) low = std::min(low, v);
        }
        if (!std::isfinite(up) || !std::isfinite(low)) {
            return 0.0;
        }
        return up - low;
    }

    /// Second-order working-set selection; ties go to the lowest index.
    bool select(double tol, std::size_t& out_i, std::size_t& out_j) const {
        double gmax = -std::numeric_limits<double>::infinity();
        std::size_t i = 2 * n_;
        for (std::size_t t = 0; t < 2 * n_; ++t) {
            if (in_up(t) && -z(t) * grad_[t] > gmax) {
                gmax = -z(t) * grad_[t];
                i = t;
            }
        }
        double gmin = std::numeric_limits<double>::infinity();
        double best = std::numeric_limits<double>::infinity();
        std::size_t j = 2 * n_;
        for (std::size_t t = 0; t < 2 * n_; ++t) {
            if (!in_low(t)) {
                continue;
            }
            const double v = -z(t) * grad_[t];
            gmin = std::min(gmin, v);
            if (i == 2 * n_) {
                continue;
            }
            const double b = gmax - v;
            if (b > 0) {
                double a = q(i, i) + q(t, t) - 2.0 * z(i) * z(t) * q(i, t);
                if (a <= 0) a = kTau;
                const double obj = -(b * b) / a;
                if (obj < best) {
                    best = obj;
                    j = t;
                }
            }
        }
        if (i == 2 * n_ || j == 2 * n_ || gmax - gmin <= tol) {
            return false;
        }
        out_i = i;
        out_j = j;
        return true;
    }

    void update(std::size_t i, std::size_t j) {
        const double old_i = alpha_[i];
        const double old_j = alpha_[j];
        const double C = C_;
        if (z(i) != z(j)) {
            double a = q(i, i) + q(j, j) + 2.0 * q(i, j);
            if (a <= 0) a = kTau;
            const double delta = (-grad_[i] - grad_[j]) / a;
            const double diff = alpha_[i] - alpha_[j];
            alpha_[i] += delta;
            alpha_[j] += delta;
            if (diff > 0) {
                if (alpha_[j] < 0) {
                    alpha_[j] = 0;
                    alpha_[i] = diff;
                }
            } else if (alpha_[i] < 0) {
                alpha_[i] = 0;
                alpha_[j] = -diff;
            }
            if (diff > 0) {
                if (alpha_[i] > C) {
                    alpha_[i] = C;
                    alpha_[j] = C - diff;
                }
            } else if (alpha_[j] > C) {
                alpha_[j] = C;
                alpha_[i] = C + diff;
            }
        } else {
            double a = q(i, i) + q(j, j) - 2.0 * q(i, j);
            if (a <= 0) a = kTau;
            const double delta = (grad_[i] - grad_[j]) / a;
            const double sum = alpha_[i] + alpha_[j];
            alpha_[i] -= delta;
            alpha_[j] += delta;
            if (sum > C) {
                if (alpha_[i] > C) {
                    alpha_[i] = C;
                    alpha_[j] = sum - C;
                }
            } else if (alpha_[j] < 0) {
                alpha_[j] = 0;
                alpha_[i] = sum;
            }
            if (sum > C) {
                if (alpha_[j] > C) {
                    alpha_[j] = C;
                    alpha_[i] = sum - C;
                }
            } else if (alpha_[i] < 0) {
                alpha_[i] = 0;
                alpha_[j] = sum;
            }
        }
        const double di = alpha_[i] - old_i;
        const double dj = alpha_[j] - old_j;
        for (std::size_t t = 0; t < 2 * n_; ++t) {
            grad_[t] += q(i, t) * di + q(j, t) * dj;
        }
    }

    /// Dual objective in maximization form: -(1/2 a'Qa + p'a).
    double dual_objective() const {
        double f = 0.0;
        for (std::size_t t = 0; t < 2 * n_; ++t) {
            f += alpha_[t] * (grad_[t] + p_[t]);
        }
        return -0.5 * f;
    }

    /// Offset b of the decision function (b = -rho).
    double bias() const {
        double ub = std::numeric_limits<double>::infinity();
        double lb = -std::numeric_limits<double>::infinity();
        double sum_free = 0.0;
        std::size_t n_free = 0;
        for (std::size_t t = 0; t < 2 * n_; ++t) {
            const double yg = z(t) * grad_[t];
            if (upper_bound(t)) {
                if (z(t) < 0) ub = std::min(ub, yg);
                else lb = std::max(lb, yg);
            } else if (lower_bound(t)) {
                if (z(t) > 0) ub = std::min(ub, yg);
                else lb = std::max(lb, yg);
            } else {
                ++n_free;
                sum_free += yg;
            }
        }
        const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
        return -rho;
    }

    double beta(std::size_t i) const { return alpha_[i] - alpha_[i + n_]; }

private:
    std::size_t n_;
    double C_;
    std::vector<double> K_;
    std::vector<double> alpha_;
    std::vector<double> grad_;
    std::vector<double> p_;
};

KernelParams resolve_gamma(const KernelParams& k, const Matrix& X_std) {
    KernelParams out = k;
    if (out.gamma) {
        return out;
    }
    // 1 / (n_features * variance of all standardized entries).
    const std::size_t count = X_std.rows() * X_std.cols();
    double var = 0.0;
    if (count > 0) {
        double mean = 0.0;
        for (std::size_t i = 0; i < X_std.rows(); ++i) {
            for (double v : X_std.row(i)) mean += v;
        }
        mean /= static_cast<double>(count);
        for (std::size_t i = 0; i < X_std.rows(); ++i) {
            for (double v : X_std.row(i)) var += (v - mean) * (v - mean);
        }
        var /= static_cast<double>(count);
    }
    out.gamma = var > 0.0 && X_std.cols() > 0 ? 1.0 / (static_cast<double>(X_std.cols()) * var) : 1.0;
    return out;
}

}  // namespace

SvrModel svr_fit(const Matrix& X, std::span<const double> y, const SvrParams& params, FitTrace* trace) {
    params.validate();
    if (X.rows() == 0) {
        throw ContractError("svr_fit: no training rows");
    }
    if (y.size() != X.rows()) {
        throw ContractError("svr_fit: X and y lengths differ");
    }
    SvrModel model;
    model.scaler = fit_scaler(X, y);
    const Matrix X_std = model.scaler.apply(X);
    std::vector<double> y_std(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        y_std[i] = model.scaler.apply_target(y[i]);
    }
    model.params = params;
    model.params.kernel = resolve_gamma(params.kernel, X_std);
    const std::size_t cap = params.max_passes.value_or(10000 * X.rows());
    model.params.max_passes = cap;

    SmoSolver solver(X_std, y_std, model.params);
    if (trace != nullptr) {
        trace->dual_objective.clear();
        trace->dual_objective.push_back(solver.dual_objective());
    }
    std::size_t i = 0;
    std::size_t j = 0;
    model.converged = false;
    while (true) {
        if (!solver.select(params.tol, i, j)) {
            model.converged = true;
            break;
        }
        if (model.iterations >= cap) {
            break;
        }
        solver.update(i, j);
        ++model.iterations;
        if (trace != nullptr) {
            trace->dual_objective.push_back(solver.dual_objective());
        }
    }
    model.kkt_violation = solver.violation();
    model.bias = solver.bias();
    model.support_vectors = Matrix(0, X.cols());
    for (std::size_t r = 0; r < X.rows(); ++r) {
        const double b = solver.beta(r);
        if (b != 0.0) {
            model.support_vectors.append_row(X_std.row(r));
            model.dual_coefs.push_back(b);
            model.support_index.push_back(r);
        }
    }
    return model;
}

double svr_decision(const SvrModel& model, std::span<const double> x_standardized) {
    double f = model.bias;
    for (std::size_t s = 0; s < model.dual_coefs.size(); ++s) {
        f += model.dual_coefs[s] * kernel_eval(model.params.kernel, model.support_vectors.row(s), x_standardized);
    }
    return f;
}

double svr_predict(const SvrModel& model, std::span<const double> x) {
    if (x.size() != model.n_features()) {
        throw ContractError("svr_predict: expected " + std::to_string(model.n_features()) + " features, got " +
                            std::to_string(x.size()));
    }
    return model.scaler.invert_target(svr_decision(model, model.scaler.apply(x)));
}

double dual_objective(const Matrix& X_std, std::span<const double> y_std, std::span<const double> beta,
                      const KernelParams& kernel, double epsilon) {
    const std::size_t n = X_std.rows();
    if (y_std.size() != n || beta.size() != n) {
        throw ContractError("dual_objective: size mismatch");
    }
    double quad = 0.0;
    double lin = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            quad += beta[i] * beta[j] * kernel_eval(kernel, X_std.row(i), X_std.row(j));
        }
        lin += y_std[i] * beta[i] - epsilon * std::abs(beta[i]);
    }
    return -0.5 * quad + lin;
}

// ---------------------------------------------------------------------------

GridSearchResult grid_search(const Matrix& X, std::span<const double> y, std::span<const SvrParams> candidates,
                             const ValidationSplit& split) {
    if (candidates.empty()) {
        throw ContractError("grid_search: empty candidate grid");
    }
    if (split.train.empty() || split.validation.size() < 2) {
        throw DegenerateDataError("grid_search: need training rows and at least two validation rows");
    }
    std::vector<double> y_train;
    std::vector<double> y_val;
    for (std::size_t i : split.train) y_train.push_back(y[i]);
    for (std::size_t i : split.validation) y_val.push_back(y[i]);
    if (std::adjacent_find(y_val.begin(), y_val.end(), std::not_equal_to<>()) == y_val.end()) {
        throw DegenerateDataError(
            "grid_search: validation targets are all equal; choose a split whose validation days differ");
    }
    const Matrix X_train = X.select_rows(split.train);
    const Matrix X_val = X.select_rows(split.validation);

    GridSearchResult result;
    std::optional<std::size_t> best;
    const auto better = [&](std::size_t cand, std::size_t incumbent) {
        const auto& a = result.scores[cand];
        const auto& b = result.scores[incumbent];
        const double sa = a.spearman.value_or(-std::numeric_limits<double>::infinity());
        const double sb = b.spearman.value_or(-std::numeric_limits<double>::infinity());
        if (sa != sb) return sa > sb;
        if (a.params.C != b.params.C) return a.params.C < b.params.C;
        if (a.params.kernel.degree != b.params.kernel.degree) return a.params.kernel.degree < b.params.kernel.degree;
        return false;  // earlier candidate keeps the lead
    };
    for (const SvrParams& cand : candidates) {
        const SvrModel model = svr_fit(X_train, y_train, cand);
        std::vector<double> pred(X_val.rows());
        for (std::size_t r = 0; r < X_val.rows(); ++r) {
            pred[r] = svr_predict(model, X_val.row(r));
        }
        result.scores.push_back({cand, stats::spearman(pred, y_val), model.converged});
        const std::size_t idx = result.scores.size() - 1;
        if (!best || better(idx, *best)) {
            best = idx;
        }
    }
    result.best = result.scores[*best].params;
    return result;
}

}  // namespace epialign::regress
