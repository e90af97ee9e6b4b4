#include "hybridsim/bdf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace hybridsim {

namespace {

const std::array<BdfCoefficients, kBdfMaxOrder> kCoefficients = {{
    {1, {1.0, 0.0, 0.0, 0.0, 0.0}, 1.0},
    {2, {4.0 / 3.0, -1.0 / 3.0, 0.0, 0.0, 0.0}, 2.0 / 3.0},
    {3, {18.0 / 11.0, -9.0 / 11.0, 2.0 / 11.0, 0.0, 0.0}, 6.0 / 11.0},
    {4, {48.0 / 25.0, -36.0 / 25.0, 16.0 / 25.0, -3.0 / 25.0, 0.0}, 12.0 / 25.0},
    {5, {300.0 / 137.0, -300.0 / 137.0, 200.0 / 137.0, -75.0 / 137.0, 12.0 / 137.0}, 60.0 / 137.0},
}};

double binomial(int m, int j) {
    double c = 1.0;
    for (int i = 1; i <= j; ++i) {
        c = c * (m - j + i) / i;
    }
    return c;
}

double error_constant(int q) { return bdf_coefficients(q).beta0 / (q + 1); }

}  // namespace

const BdfCoefficients& bdf_coefficients(int q) {
    if (q < 1 || q > kBdfMaxOrder) {
        throw std::out_of_range("bdf_coefficients: order must lie in [1, 5]");
    }
    return kCoefficients[static_cast<std::size_t>(q - 1)];
}

BdfOrderChoice bdf_select_order_and_step(int q, double h, const BdfErrorEstimates& estimates,
                                         std::size_t records, double safety, int max_order) {
    const auto factor = [safety](double err, int k) {
        return safety * std::pow(std::max(err, 1e-10), -1.0 / (k + 1));
    };
    if (records <= 1) {
        return {1, h * std::clamp(factor(estimates.current, 1), 0.2, 2.5)};
    }
    int best_order = q;
    double best = factor(estimates.current, q);
    if (estimates.lower && q > 1) {
        const double f = factor(*estimates.lower, q - 1);
        if (f > best) {
            best = f;
            best_order = q - 1;
        }
    }
    if (estimates.higher && q < max_order) {
        const double f = factor(*estimates.higher, q + 1);
        if (f > best) {
            best = f;
            best_order = q + 1;
        }
    }
    return {best_order, h * std::clamp(best, 0.2, 2.5)};
}

BdfSolver::BdfSolver(OdeSystem system, IntegratorOptions options)
    : sys_(std::move(system)), options_(options), n_(sys_.dimension) {
    if (n_ == 0 || !sys_.rhs) {
        throw std::invalid_argument("BdfSolver: empty system");
    }
    if (sys_.error_components > n_) {
        throw std::invalid_argument("BdfSolver: error_components exceeds the dimension");
    }
    max_newton_ = options_.max_newton_iters > 0 ? options_.max_newton_iters : 4;
    newton_tol_ = options_.newton_tol > 0.0 ? options_.newton_tol
                                            : detail::default_newton_tol(options_.rtol);
    max_order_ = std::clamp(options_.max_order, 1, kBdfMaxOrder);
    if (options_.fixed_order < 0 || options_.fixed_order > kBdfMaxOrder) {
        throw std::invalid_argument("BdfSolver: fixed_order must lie in [0, 5]");
    }
    const auto n = static_cast<Eigen::Index>(n_);
    jac_.resize(n, n);
    f0_.resize(n);
}

int BdfSolver::order() const noexcept {
    const int available = static_cast<int>(records_.size());
    const int wanted = options_.fixed_order > 0 ? options_.fixed_order : order_;
    return std::max(1, std::min(wanted, available));
}

void BdfSolver::reset_history(double t, const Vector& y) {
    if (y.size() != static_cast<Eigen::Index>(n_)) {
        throw std::invalid_argument("BdfSolver: state has the wrong dimension");
    }
    t_ = t;
    y_ = y;
    records_.clear();
    records_.push_back({t, y});
    spacing_ = 0.0;
    sys_.rhs(t_, y_, f0_);
    ++counters_.rhs_evals;
    order_ = 1;
    last_order_ = 1;
    steps_at_order_ = 0;
    lu_valid_ = false;
    eta_ = 1.0;
}

void BdfSolver::initialize(double t, const Vector& y) {
    reset_history(t, y);
    recent_h_.clear();
    have_jac_ = false;
    need_initial_h_ = true;
    after_restart_ = false;
}

void BdfSolver::restart(double t, const Vector& y) {
    reset_history(t, y);
    ++counters_.restarts;
    after_restart_ = true;
    if (options_.h_init > 0.0 && options_.fixed_step) {
        h_ = options_.h_init;
        need_initial_h_ = false;
    } else if (recent_h_.empty()) {
        need_initial_h_ = true;
    } else {
        const double mean = std::accumulate(recent_h_.begin(), recent_h_.end(), 0.0) /
                            static_cast<double>(recent_h_.size());
        h_ = std::max(std::min({recent_h_.back(), 0.01 * mean, options_.h_max}), options_.h_min);
        need_initial_h_ = false;
    }
}

void BdfSolver::seed_history(const std::vector<double>& t, const std::vector<Vector>& y) {
    if (t.empty() || t.size() != y.size() || t.size() > kBdfMaxRecords) {
        throw std::invalid_argument("seed_history: need 1 to 6 matching records");
    }
    const double h = t.size() > 1 ? t[1] - t[0] : 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) {
        const double d = t[i] - t[i - 1];
        if (!(d > 0.0) || std::abs(d - h) > 1e-9 * h) {
            throw std::invalid_argument("seed_history: records must be uniformly spaced and increasing");
        }
    }
    reset_history(t.back(), y.back());
    records_.clear();
    for (std::size_t i = 0; i < t.size(); ++i) {
        records_.push_back({t[i], y[i]});
    }
    spacing_ = h;
    order_ = std::min(static_cast<int>(t.size()), max_order_);
    if (h > 0.0) {
        h_ = h;
        need_initial_h_ = false;
    } else {
        need_initial_h_ = true;
    }
}

void BdfSolver::ensure_jacobian() {
    if (have_jac_ && jac_age_ <= options_.max_jacobian_age) {
        return;
    }
    if (sys_.jacobian) {
        sys_.jacobian(t_, y_, jac_);
    } else {
        if (records_.size() == 1) {
            jac_ = fd_jacobian(sys_.rhs, t_, y_, f0_, options_.fd_increment);
        } else {
            jac_ = fd_jacobian(sys_.rhs, t_, y_, options_.fd_increment);
            ++counters_.rhs_evals;
        }
        counters_.rhs_evals += n_;
    }
    ++counters_.jacobian_evals;
    have_jac_ = true;
    jac_current_ = true;
    jac_age_ = 0;
    lu_valid_ = false;
}

void BdfSolver::factorize(double hb) {
    const auto n = static_cast<Eigen::Index>(n_);
    lu_.compute(Matrix::Identity(n, n) - hb * jac_);
    ++counters_.lu_factorizations;
    lu_hb_ = hb;
    lu_valid_ = true;
}

std::size_t BdfSolver::interpolant_points() const {
    return std::min(records_.size(), static_cast<std::size_t>(last_order_) + 1);
}

void BdfSolver::rebuild_history(double h_new) {
    const std::size_t keep = std::min(records_.size(), static_cast<std::size_t>(order()) + 1);
    std::vector<double> ts;
    std::vector<Vector> ys;
    for (std::size_t i = records_.size() - keep; i < records_.size(); ++i) {
        ts.push_back(records_[i].t);
        ys.push_back(records_[i].y);
    }
    const double t_n = ts.back();
    std::deque<BdfRecord> rebuilt;
    for (std::size_t j = keep; j-- > 0;) {
        const double t = t_n - static_cast<double>(j) * h_new;
        if (j == 0) {
            rebuilt.push_back({t_n, ys.back()});
            continue;
        }
        Vector v = Vector::Zero(static_cast<Eigen::Index>(n_));
        for (std::size_t i = 0; i < keep; ++i) {
            double b = 1.0;
            for (std::size_t k = 0; k < keep; ++k) {
                if (k != i) {
                    b *= (t - ts[k]) / (ts[i] - ts[k]);
                }
            }
            v += b * ys[i];
        }
        rebuilt.push_back({t, std::move(v)});
    }
    records_ = std::move(rebuilt);
    spacing_ = h_new;
}

Vector BdfSolver::difference(const Vector& y_new, int m) const {
    // m-th backward difference of (records..., y_new) at y_new.
    Vector d = y_new;
    const std::size_t size = records_.size();
    for (int j = 1; j <= m; ++j) {
        const double c = binomial(m, j) * ((j % 2 == 0) ? 1.0 : -1.0);
        d += c * records_[size - static_cast<std::size_t>(j)].y;
    }
    return d;
}

BdfAttempt BdfSolver::attempt_step(double h) {
    const int q = order();
    const auto& coef = bdf_coefficients(q);
    const std::size_t size = records_.size();
    const std::size_t m = sys_.error_components;
    const double t_new = t_ + h;

    // Predictor.
    Vector pred;
    const std::size_t p = std::min(size, static_cast<std::size_t>(q) + 1);
    if (p == 1) {
        pred = y_ + h * f0_;
    } else {
        pred = Vector::Zero(static_cast<Eigen::Index>(n_));
        for (std::size_t i = 0; i < p; ++i) {
            // extrapolation weight of record size-1-i to one spacing ahead
            double b = 1.0;
            for (std::size_t k = 0; k < p; ++k) {
                if (k != i) {
                    b *= (1.0 + static_cast<double>(k)) / (static_cast<double>(k) - static_cast<double>(i));
                }
            }
            pred += b * records_[size - 1 - i].y;
        }
    }
    Vector psi = Vector::Zero(static_cast<Eigen::Index>(n_));
    for (int i = 1; i <= q; ++i) {
        psi += coef.alpha[static_cast<std::size_t>(i - 1)] * records_[size - static_cast<std::size_t>(i)].y;
    }

    ensure_jacobian();
    const double hb = h * coef.beta0;
    if (!lu_valid_ || hb != lu_hb_) {
        factorize(hb);
    }

    BdfAttempt out;
    out.order = q;
    Vector y = pred;
    Vector f(static_cast<Eigen::Index>(n_));
    bool converged = false;
    double eta = std::pow(std::max(eta_, std::numeric_limits<double>::epsilon()), 0.8);
    double prev = 0.0;
    for (int k = 1; k <= max_newton_; ++k) {
        sys_.rhs(t_new, y, f);
        ++counters_.rhs_evals;
        const Vector residual = psi + hb * f - y;
        const Vector dy = lu_.solve(residual);
        y += dy;
        ++counters_.newton_iters;
        out.newton_iters = k;
        if (!dy.allFinite()) {
            break;
        }
        const double dnorm = detail::scaled_rms(dy, y_, y_, m, options_.rtol, options_.atol);
        if (k > 1) {
            const double theta = prev > 0.0 ? dnorm / prev : 0.0;
            if (theta >= 0.99) {
                break;
            }
            eta = theta / (1.0 - theta);
        }
        if (eta * dnorm <= newton_tol_ || dnorm == 0.0) {
            converged = true;
            break;
        }
        prev = dnorm;
    }
    if (!converged) {
        out.status = AttemptStatus::newton_failed;
        return out;
    }
    eta_ = eta;

    out.estimates.current =
        error_constant(q) * detail::scaled_rms(y - pred, y_, y, m, options_.rtol, options_.atol);
    if (q > 1) {
        out.estimates.lower = error_constant(q - 1) *
                              detail::scaled_rms(difference(y, q), y_, y, m, options_.rtol, options_.atol);
    }
    if (q < max_order_ && size >= static_cast<std::size_t>(q) + 2) {
        out.estimates.higher = error_constant(q + 1) * detail::scaled_rms(difference(y, q + 2), y_, y, m,
                                                                          options_.rtol, options_.atol);
    }
    if (m == 0) {
        out.estimates.current = 0.0;
    }
    out.err = out.estimates.current;
    out.y = std::move(y);
    out.status = (out.err <= 1.0 || options_.fixed_step) ? AttemptStatus::accepted
                                                          : AttemptStatus::rejected;
    return out;
}

void BdfSolver::step(double t_stop) {
    if (!(t_stop > t_)) {
        return;
    }
    if (need_initial_h_) {
        h_ = options_.h_init > 0.0
                 ? options_.h_init
                 : detail::initial_step(sys_, options_, t_, y_, f0_, t_stop, 1, counters_.rhs_evals);
        need_initial_h_ = false;
    }
    int rejects = 0;
    while (true) {
        double h = std::min(h_, options_.h_max);
        bool last = false;
        const double remaining = t_stop - t_;
        if (h >= remaining * (1.0 - 1e-12)) {
            if (std::abs(h - remaining) > 1e-10 * h) {
                h = remaining;
            }
            last = true;
        }
        if (h < options_.h_min && !last) {
            throw IntegrationError("BDF: step size underflow", t_, h, y_);
        }
        if (records_.size() > 1 && h != spacing_) {
            rebuild_history(h);
        }
        BdfAttempt att = attempt_step(h);
        if (att.status == AttemptStatus::newton_failed) {
            ++counters_.newton_failures;
            if (options_.fixed_step) {
                throw IntegrationError("BDF: Newton iteration failed at fixed step size", t_, h, y_);
            }
            if (jac_current_) {
                h_ = 0.5 * h;
            } else {
                have_jac_ = false;
                h_ = h;
            }
            continue;
        }
        if (att.status == AttemptStatus::rejected) {
            ++counters_.steps_rejected;
            ++rejects;
            h_ = h * std::clamp(options_.safety * std::pow(att.err, -1.0 / (att.order + 1)), 0.2, 1.0);
            if (rejects >= 2 && order_ > 1 && options_.fixed_order == 0) {
                order_ = att.order - 1;
                steps_at_order_ = 0;
            }
            continue;
        }

        const int q = att.order;
        t_ = last ? t_stop : t_ + h;
        y_ = std::move(att.y);
        records_.push_back({t_, y_});
        if (records_.size() > kBdfMaxRecords) {
            records_.pop_front();
        }
        spacing_ = h;
        last_order_ = q;
        order_ = q;
        jac_current_ = false;
        ++jac_age_;
        ++counters_.steps_accepted;
        ++counters_.order_histogram[static_cast<std::size_t>(q)];
        if (after_restart_) {
            ++counters_.post_restart_steps;
            if (q == 1) {
                ++counters_.post_restart_order1;
            }
            after_restart_ = false;
        }
        recent_h_.push_back(h);
        if (recent_h_.size() > 10) {
            recent_h_.pop_front();
        }
        ++steps_at_order_;

        if (options_.fixed_step) {
            return;
        }
        BdfErrorEstimates est = att.estimates;
        if (steps_at_order_ < q + 1 || options_.fixed_order > 0) {
            est.higher.reset();
        }
        if (options_.fixed_order > 0) {
            est.lower.reset();
        }
        const BdfOrderChoice choice =
            bdf_select_order_and_step(q, h, est, records_.size(), options_.safety, max_order_);
        if (choice.order != q) {
            order_ = choice.order;
            steps_at_order_ = 0;
        }
        const double fac = choice.h / h;
        const double h_new = (fac >= 1.0 && fac < 1.2) ? h : choice.h;
        h_ = std::min(last ? std::max(h_new, h_) : h_new, options_.h_max);
        return;
    }
}

double BdfSolver::step_start() const {
    return records_.size() > 1 ? records_[records_.size() - 2].t : t_;
}

Vector BdfSolver::dense_output(double t) const {
    const std::size_t k = interpolant_points();
    const std::size_t size = records_.size();
    Vector v = Vector::Zero(static_cast<Eigen::Index>(n_));
    for (std::size_t i = size - k; i < size; ++i) {
        double b = 1.0;
        for (std::size_t j = size - k; j < size; ++j) {
            if (j != i) {
                b *= (t - records_[j].t) / (records_[i].t - records_[j].t);
            }
        }
        v += b * records_[i].y;
    }
    return v;
}

double BdfSolver::dense_component(double t, std::size_t c) const {
    const std::size_t k = interpolant_points();
    const std::size_t size = records_.size();
    const auto idx = static_cast<Eigen::Index>(c);
    double v = 0.0;
    for (std::size_t i = size - k; i < size; ++i) {
        double b = 1.0;
        for (std::size_t j = size - k; j < size; ++j) {
            if (j != i) {
                b *= (t - records_[j].t) / (records_[i].t - records_[j].t);
            }
        }
        v += b * records_[i].y[idx];
    }
    return v;
}

CrossingSample BdfSolver::crossing_sample(std::size_t component) const {
    const std::size_t k = interpolant_points();
    const std::size_t size = records_.size();
    const auto idx = static_cast<Eigen::Index>(component);
    CrossingSample s;
    for (std::size_t i = size - k; i < size; ++i) {
        s.t.push_back(records_[i].t);
        s.z.push_back(records_[i].y[idx]);
    }
    return s;
}

}  // namespace hybridsim
