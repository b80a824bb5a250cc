#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>

#include "reliance/base_models.hpp"
#include "reliance/errors.hpp"

namespace reliance::models {
namespace {

constexpr double kTau = 1e-12;

double gamma_scale(const nn::Matrix& x) {
    const int n = x.rows();
    const int d = x.cols();
    double total_var = 0.0;
    for (int j = 0; j < d; ++j) {
        double mean = 0.0;
        for (int i = 0; i < n; ++i) mean += x(i, j);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (int i = 0; i < n; ++i) {
            const double dv = x(i, j) - mean;
            var += dv * dv;
        }
        total_var += var / static_cast<double>(n);
    }
    const double mean_var = total_var / static_cast<double>(d);
    if (mean_var <= 0.0) return 1.0 / static_cast<double>(d);
    return 1.0 / (static_cast<double>(d) * mean_var);
}

double rbf(std::span<const double> a, std::span<const double> b, double gamma) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double dv = a[i] - b[i];
        s += dv * dv;
    }
    return std::exp(-gamma * s);
}

// LRU cache of full kernel rows, bounded by a byte budget.
class KernelCache {
  public:
    KernelCache(const nn::Matrix& x, double gamma, std::size_t budget_bytes)
        : x_(x), gamma_(gamma), n_(x.rows()) {
        const std::size_t row_bytes = static_cast<std::size_t>(n_) * sizeof(double);
        max_rows_ = row_bytes ? budget_bytes / row_bytes : 0;
        if (max_rows_ < 2)
            throw BudgetTooSmallError("kernel cache cannot hold two rows (" +
                                      std::to_string(budget_bytes) + " bytes for n=" +
                                      std::to_string(n_) + ")");
        norms_.resize(static_cast<std::size_t>(n_));
        for (int i = 0; i < n_; ++i)
            norms_[static_cast<std::size_t>(i)] = nn::dot(x.row_span(i), x.row_span(i));
    }

    const std::vector<double>& row(int i) {
        auto it = entries_.find(i);
        if (it != entries_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second.lru_pos);
            return it->second.values;
        }
        if (entries_.size() >= max_rows_) {
            const int victim = lru_.back();
            lru_.pop_back();
            entries_.erase(victim);
        }
        Entry e;
        e.values.resize(static_cast<std::size_t>(n_));
        const double* xi = x_.row(i);
        const double ni = norms_[static_cast<std::size_t>(i)];
        for (int j = 0; j < n_; ++j) {
            double dot = 0.0;
            const double* xj = x_.row(j);
            for (int c = 0; c < x_.cols(); ++c) dot += xi[c] * xj[c];
            const double dist2 = std::max(0.0, ni + norms_[static_cast<std::size_t>(j)] - 2.0 * dot);
            e.values[static_cast<std::size_t>(j)] = std::exp(-gamma_ * dist2);
        }
        lru_.push_front(i);
        e.lru_pos = lru_.begin();
        return entries_.emplace(i, std::move(e)).first->second.values;
    }

  private:
    struct Entry {
        std::vector<double> values;
        std::list<int>::iterator lru_pos;
    };
    const nn::Matrix& x_;
    double gamma_;
    int n_;
    std::size_t max_rows_;
    std::vector<double> norms_;
    std::list<int> lru_;
    std::unordered_map<int, Entry> entries_;
};

}  // namespace

SvmModel train_svm_smo(const nn::Matrix& x, const std::vector<int>& y, const SvmConfig& config) {
    const int n = x.rows();
    if (n < 2) throw EmptyInputError("train_svm_smo: need at least two samples");
    if (static_cast<int>(y.size()) != n)
        throw ShapeMismatchError("train_svm_smo: label count does not match rows");
    {
        bool has0 = false, has1 = false;
        for (int v : y) (v ? has1 : has0) = true;
        if (!has0 || !has1) throw SingleClassError("train_svm_smo: needs both classes");
    }

    const double gamma = config.gamma > 0.0 ? config.gamma : gamma_scale(x);
    const double c = config.c;
    std::vector<double> sy(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) sy[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] ? 1.0 : -1.0;

    KernelCache cache(x, gamma, config.cache_bytes);

    // Dual minimization of 0.5 a'Qa - e'a with Q_ij = y_i y_j K_ij.
    std::vector<double> alpha(static_cast<std::size_t>(n), 0.0);
    std::vector<double> grad(static_cast<std::size_t>(n), -1.0);

    std::int64_t iter = 0;
    bool converged = false;
    while (iter < config.max_iter) {
        // Maximal violating pair: i maximizes -y*G over the "up" set,
        // j minimizes it over the "down" set.
        int i = -1, j = -1;
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        for (int t = 0; t < n; ++t) {
            const std::size_t s = static_cast<std::size_t>(t);
            const double v = -sy[s] * grad[s];
            const bool up = sy[s] > 0 ? alpha[s] < c : alpha[s] > 0;
            const bool down = sy[s] > 0 ? alpha[s] > 0 : alpha[s] < c;
            if (up && v > gmax) {
                gmax = v;
                i = t;
            }
            if (down && v < gmin) {
                gmin = v;
                j = t;
            }
        }
        if (i < 0 || j < 0 || gmax - gmin <= config.tolerance) {
            converged = true;
            break;
        }
        ++iter;

        const std::vector<double>& ki = cache.row(i);
        const std::vector<double>& kj = cache.row(j);
        const std::size_t si = static_cast<std::size_t>(i);
        const std::size_t sj = static_cast<std::size_t>(j);
        const double old_ai = alpha[si];
        const double old_aj = alpha[sj];

        if (sy[si] != sy[sj]) {
            double quad = ki[si] + kj[sj] + 2.0 * ki[sj];
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[si] - grad[sj]) / quad;
            const double diff = alpha[si] - alpha[sj];
            alpha[si] += delta;
            alpha[sj] += delta;
            if (diff > 0.0) {
                if (alpha[sj] < 0.0) {
                    alpha[sj] = 0.0;
                    alpha[si] = diff;
                }
            } else {
                if (alpha[si] < 0.0) {
                    alpha[si] = 0.0;
                    alpha[sj] = -diff;
                }
            }
            if (diff > 0.0) {
                if (alpha[si] > c) {
                    alpha[si] = c;
                    alpha[sj] = c - diff;
                }
            } else {
                if (alpha[sj] > c) {
                    alpha[sj] = c;
                    alpha[si] = c + diff;
                }
            }
        } else {
            double quad = ki[si] + kj[sj] - 2.0 * ki[sj];
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[si] - grad[sj]) / quad;
            const double sum = alpha[si] + alpha[sj];
            alpha[si] -= delta;
            alpha[sj] += delta;
            if (sum > c) {
                if (alpha[si] > c) {
                    alpha[si] = c;
                    alpha[sj] = sum - c;
                }
            } else {
                if (alpha[sj] < 0.0) {
                    alpha[sj] = 0.0;
                    alpha[si] = sum;
                }
            }
            if (sum > c) {
                if (alpha[sj] > c) {
                    alpha[sj] = c;
                    alpha[si] = sum - c;
                }
            } else {
                if (alpha[si] < 0.0) {
                    alpha[si] = 0.0;
                    alpha[sj] = sum;
                }
            }
        }

        const double dai = (alpha[si] - old_ai) * sy[si];
        const double daj = (alpha[sj] - old_aj) * sy[sj];
        for (int t = 0; t < n; ++t) {
            const std::size_t s = static_cast<std::size_t>(t);
            grad[s] += sy[s] * (dai * ki[s] + daj * kj[s]);
        }
    }

    // Bias: mean of -y*G over free vectors, else the midpoint of the bounds.
    double b;
    {
        double sum = 0.0;
        int free_count = 0;
        double ub = std::numeric_limits<double>::infinity();
        double lb = -std::numeric_limits<double>::infinity();
        for (int t = 0; t < n; ++t) {
            const std::size_t s = static_cast<std::size_t>(t);
            const double v = -sy[s] * grad[s];
            if (alpha[s] > 0.0 && alpha[s] < c) {
                sum += v;
                ++free_count;
            } else {
                const bool up = sy[s] > 0 ? alpha[s] < c : alpha[s] > 0;
                if (up)
                    lb = std::max(lb, v);
                else
                    ub = std::min(ub, v);
            }
        }
        b = free_count > 0 ? sum / static_cast<double>(free_count) : (ub + lb) / 2.0;
    }

    SvmModel model;
    model.config = config;
    model.gamma = gamma;
    model.bias = b;
    model.smo_iterations = iter;
    model.converged = converged;
    int sv_count = 0;
    for (double a : alpha)
        if (a > 0.0) ++sv_count;
    model.support_vectors = nn::Matrix(sv_count, x.cols());
    model.coeffs.reserve(static_cast<std::size_t>(sv_count));
    model.sv_train_index.reserve(static_cast<std::size_t>(sv_count));
    int r = 0;
    for (int t = 0; t < n; ++t) {
        const std::size_t s = static_cast<std::size_t>(t);
        if (alpha[s] <= 0.0) continue;
        std::copy(x.row(t), x.row(t) + x.cols(), model.support_vectors.row(r));
        model.coeffs.push_back(alpha[s] * sy[s]);
        model.sv_train_index.push_back(t);
        ++r;
    }

    // Platt calibration on the training decision values.
    std::vector<double> decisions(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) decisions[static_cast<std::size_t>(t)] = svm_decision(model, x.row_span(t));
    auto [pa, pb] = platt_calibrate(decisions, y);
    model.platt_a = pa;
    model.platt_b = pb;
    return model;
}

double svm_decision(const SvmModel& model, std::span<const double> x) {
    if (model.support_vectors.rows() == 0) throw UntrainedModelError("svm_decision: no support vectors");
    if (static_cast<int>(x.size()) != model.support_vectors.cols())
        throw ShapeMismatchError("svm_decision: feature width mismatch");
    double f = model.bias;
    for (int s = 0; s < model.support_vectors.rows(); ++s)
        f += model.coeffs[static_cast<std::size_t>(s)] *
             rbf(model.support_vectors.row_span(s), x, model.gamma);
    return f;
}

double svm_score(const SvmModel& model, std::span<const double> x) {
    return platt_probability(svm_decision(model, x), model.platt_a, model.platt_b);
}

std::vector<double> svm_kkt_violations(const SvmModel& model, const nn::Matrix& x,
                                       const std::vector<int>& y) {
    const int n = x.rows();
    std::vector<double> alpha(static_cast<std::size_t>(n), 0.0);
    for (std::size_t s = 0; s < model.sv_train_index.size(); ++s)
        alpha[static_cast<std::size_t>(model.sv_train_index[s])] = std::abs(model.coeffs[s]);

    std::vector<double> violations(static_cast<std::size_t>(n), 0.0);
    const double c = model.config.c;
    for (int i = 0; i < n; ++i) {
        const std::size_t s = static_cast<std::size_t>(i);
        const double yi = y[s] ? 1.0 : -1.0;
        const double margin = yi * svm_decision(model, x.row_span(i));
        double v = 0.0;
        if (alpha[s] <= 0.0)
            v = std::max(0.0, 1.0 - margin);
        else if (alpha[s] >= c)
            v = std::max(0.0, margin - 1.0);
        else
            v = std::abs(margin - 1.0);
        violations[s] = v;
    }
    return violations;
}

std::pair<double, double> platt_calibrate(std::span<const double> decisions,
                                          const std::vector<int>& labels) {
    const std::size_t n = decisions.size();
    double prior1 = 0.0;
    for (int v : labels)
        if (v) prior1 += 1.0;
    const double prior0 = static_cast<double>(n) - prior1;
    if (prior0 == 0.0 || prior1 == 0.0)
        throw SingleClassError("platt_calibrate: needs both classes");

    const double hi_target = (prior1 + 1.0) / (prior1 + 2.0);
    const double lo_target = 1.0 / (prior0 + 2.0);
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = labels[i] ? hi_target : lo_target;

    constexpr int max_iter = 100;
    constexpr double min_step = 1e-10;
    constexpr double sigma = 1e-12;
    constexpr double eps = 1e-5;

    double a = 0.0;
    double b = std::log((prior0 + 1.0) / (prior1 + 1.0));

    auto objective = [&](double aa, double bb) {
        double f = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double fapb = decisions[i] * aa + bb;
            if (fapb >= 0.0)
                f += t[i] * fapb + std::log1p(std::exp(-fapb));
            else
                f += (t[i] - 1.0) * fapb + std::log1p(std::exp(fapb));
        }
        return f;
    };

    double fval = objective(a, b);
    for (int it = 0; it < max_iter; ++it) {
        double h11 = sigma, h22 = sigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double fapb = decisions[i] * a + b;
            double p, q;
            if (fapb >= 0.0) {
                p = std::exp(-fapb) / (1.0 + std::exp(-fapb));
                q = 1.0 / (1.0 + std::exp(-fapb));
            } else {
                p = 1.0 / (1.0 + std::exp(fapb));
                q = std::exp(fapb) / (1.0 + std::exp(fapb));
            }
            const double d2 = p * q;
            h11 += decisions[i] * decisions[i] * d2;
            h22 += d2;
            h21 += decisions[i] * d2;
            const double d1 = t[i] - p;
            g1 += decisions[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < eps && std::abs(g2) < eps) break;

        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double db = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * da + g2 * db;

        double step = 1.0;
        while (step >= min_step) {
            const double new_a = a + step * da;
            const double new_b = b + step * db;
            const double new_f = objective(new_a, new_b);
            if (new_f < fval + 1e-4 * step * gd) {
                a = new_a;
                b = new_b;
                fval = new_f;
                break;
            }
            step /= 2.0;
        }
        if (step < min_step) break;
    }
    return {a, b};
}

double platt_probability(double decision, double a, double b) {
    const double fapb = decision * a + b;
    if (fapb >= 0.0) {
        const double e = std::exp(-fapb);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(fapb));
}

}  // namespace reliance::models
