#include "hybridsim/radau.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hybridsim {

namespace {

const double kSqrt6 = std::sqrt(6.0);

// Real eigenvalue of A^{-1} and the error-estimator weights.
const double kU1 = 1.0 / ((6.0 + std::cbrt(81.0) - std::cbrt(9.0)) / 30.0);
const double kDD1 = -(13.0 + 7.0 * kSqrt6) / 3.0;
const double kDD2 = (-13.0 + 7.0 * kSqrt6) / 3.0;
constexpr double kDD3 = -1.0 / 3.0;

IrkTableau make_tableau() {
    IrkTableau tab;
    const double s = kSqrt6;
    tab.a = {{{(88.0 - 7.0 * s) / 360.0, (296.0 - 169.0 * s) / 1800.0, (-2.0 + 3.0 * s) / 225.0},
              {(296.0 + 169.0 * s) / 1800.0, (88.0 + 7.0 * s) / 360.0, (-2.0 - 3.0 * s) / 225.0},
              {(16.0 - s) / 36.0, (16.0 + s) / 36.0, 1.0 / 9.0}}};
    tab.b = tab.a[2];
    tab.c = {(4.0 - s) / 10.0, (4.0 + s) / 10.0, 1.0};
    return tab;
}

// Lagrange basis on the nodes (0, c1, c2, 1) at theta.
std::array<double, 4> collocation_basis(double theta) {
    const auto& c = radau_iia_tableau().c;
    const std::array<double, 4> nodes = {0.0, c[0], c[1], c[2]};
    std::array<double, 4> w{};
    for (std::size_t i = 0; i < 4; ++i) {
        double b = 1.0;
        for (std::size_t j = 0; j < 4; ++j) {
            if (j != i) {
                b *= (theta - nodes[j]) / (nodes[i] - nodes[j]);
            }
        }
        w[i] = b;
    }
    return w;
}

}  // namespace

const IrkTableau& radau_iia_tableau() {
    static const IrkTableau tab = make_tableau();
    return tab;
}

Vector collocation_value(const IrkStages& stages, double theta) {
    const auto w = collocation_basis(theta);
    return w[0] * stages.y0 + w[1] * stages.g[0] + w[2] * stages.g[1] + w[3] * stages.g[2];
}

double collocation_component(const IrkStages& stages, double theta, std::size_t i) {
    const auto w = collocation_basis(theta);
    const auto k = static_cast<Eigen::Index>(i);
    return w[0] * stages.y0[k] + w[1] * stages.g[0][k] + w[2] * stages.g[1][k] +
           w[3] * stages.g[2][k];
}

RadauSolver::RadauSolver(OdeSystem system, IntegratorOptions options)
    : sys_(std::move(system)), options_(options), n_(sys_.dimension) {
    if (n_ == 0 || !sys_.rhs) {
        throw std::invalid_argument("RadauSolver: empty system");
    }
    if (sys_.error_components > n_) {
        throw std::invalid_argument("RadauSolver: error_components exceeds the dimension");
    }
    max_newton_ = options_.max_newton_iters > 0 ? options_.max_newton_iters : 7;
    newton_tol_ = options_.newton_tol > 0.0 ? options_.newton_tol
                                            : detail::default_newton_tol(options_.rtol);
    const auto n = static_cast<Eigen::Index>(n_);
    jac_.resize(n, n);
    z_.resize(3 * n);
    dz_.resize(3 * n);
    rhs_.resize(3 * n);
    f_stage_.resize(3 * n);
    tmp_.resize(n);
    f0_.resize(n);
}

void RadauSolver::start(double t, const Vector& y) {
    if (y.size() != static_cast<Eigen::Index>(n_)) {
        throw std::invalid_argument("RadauSolver: state has the wrong dimension");
    }
    t_ = t;
    y_ = y;
    sys_.rhs(t_, y_, f0_);
    ++counters_.rhs_evals;
    need_initial_h_ = true;
    have_last_ = false;
    last_ = IrkStages{t_, 0.0, y_, {y_, y_, y_}};
    jac_current_ = false;
    jac_age_ = options_.max_jacobian_age + 1;  // forces a fresh Jacobian
    lu_valid_ = false;
    eta_ = 1.0;
}

void RadauSolver::initialize(double t, const Vector& y) {
    start(t, y);
    after_restart_ = false;
}

void RadauSolver::restart(double t, const Vector& y) {
    start(t, y);
    after_restart_ = true;
    ++counters_.restarts;
}

void RadauSolver::ensure_jacobian() {
    if (jac_current_ || jac_age_ <= options_.max_jacobian_age) {
        return;
    }
    if (sys_.jacobian) {
        sys_.jacobian(t_, y_, jac_);
    } else {
        jac_ = fd_jacobian(sys_.rhs, t_, y_, f0_, options_.fd_increment);
        counters_.rhs_evals += n_;
    }
    ++counters_.jacobian_evals;
    jac_current_ = true;
    jac_age_ = 0;
    lu_valid_ = false;
}

void RadauSolver::factorize(double h) {
    const auto& tab = radau_iia_tableau();
    const auto n = static_cast<Eigen::Index>(n_);
    Matrix m = Matrix::Identity(3 * n, 3 * n);
    for (Eigen::Index i = 0; i < 3; ++i) {
        for (Eigen::Index j = 0; j < 3; ++j) {
            m.block(i * n, j * n, n, n).noalias() -= (h * tab.a[i][j]) * jac_;
        }
    }
    stage_lu_.compute(m);
    Matrix e = (kU1 / h) * Matrix::Identity(n, n) - jac_;
    error_lu_.compute(e);
    counters_.lu_factorizations += 2;
    lu_h_ = h;
    lu_valid_ = true;
}

IrkAttempt RadauSolver::attempt_step(double h) {
    const auto& tab = radau_iia_tableau();
    const auto n = static_cast<Eigen::Index>(n_);
    ensure_jacobian();
    if (!lu_valid_ || h != lu_h_) {
        factorize(h);
    }

    if (have_last_) {
        for (Eigen::Index i = 0; i < 3; ++i) {
            const double theta = 1.0 + tab.c[static_cast<std::size_t>(i)] * h / last_.h;
            z_.segment(i * n, n) = collocation_value(last_, theta) - y_;
        }
    } else {
        z_.setZero();
    }

    const std::size_t m = sys_.error_components;
    const auto newton_norm = [&](const Vector& dz) {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < 3; ++i) {
            const double r = detail::scaled_rms(dz.segment(i * n, n), y_, y_, m, options_.rtol,
                                                options_.atol);
            sum += r * r;
        }
        return std::sqrt(sum / 3.0);
    };

    IrkAttempt out;
    bool converged = false;
    double eta = std::pow(std::max(eta_, std::numeric_limits<double>::epsilon()), 0.8);
    double prev = 0.0;
    for (int k = 1; k <= max_newton_; ++k) {
        for (Eigen::Index i = 0; i < 3; ++i) {
            tmp_ = y_ + z_.segment(i * n, n);
            Vector fi(n);
            sys_.rhs(t_ + tab.c[static_cast<std::size_t>(i)] * h, tmp_, fi);
            f_stage_.segment(i * n, n) = fi;
        }
        counters_.rhs_evals += 3;
        for (Eigen::Index i = 0; i < 3; ++i) {
            auto r = rhs_.segment(i * n, n);
            r = -z_.segment(i * n, n);
            for (Eigen::Index j = 0; j < 3; ++j) {
                r += (h * tab.a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) *
                     f_stage_.segment(j * n, n);
            }
        }
        dz_ = stage_lu_.solve(rhs_);
        z_ += dz_;
        ++counters_.newton_iters;
        out.newton_iters = k;
        if (!dz_.allFinite()) {
            break;
        }
        const double dnorm = newton_norm(dz_);
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

    out.stages.t = t_;
    out.stages.h = h;
    out.stages.y0 = y_;
    for (Eigen::Index i = 0; i < 3; ++i) {
        out.stages.g[static_cast<std::size_t>(i)] = y_ + z_.segment(i * n, n);
    }
    const Vector& y_new = out.stages.g[2];

    const Vector f2 = (kDD1 * z_.segment(0, n) + kDD2 * z_.segment(n, n) + kDD3 * z_.segment(2 * n, n)) / h;
    Vector err_vec = error_lu_.solve(f0_ + f2);
    double err = std::max(detail::scaled_rms(err_vec, y_, y_new, m, options_.rtol, options_.atol), 1e-10);
    if (err >= 1.0) {
        tmp_ = y_ + err_vec;
        Vector f1(n);
        sys_.rhs(t_, tmp_, f1);
        ++counters_.rhs_evals;
        err_vec = error_lu_.solve(f1 + f2);
        err = std::max(detail::scaled_rms(err_vec, y_, y_new, m, options_.rtol, options_.atol), 1e-10);
    }
    if (m == 0) {
        err = 0.0;
    }
    out.err = err;
    out.status = (err <= 1.0 || options_.fixed_step) ? AttemptStatus::accepted : AttemptStatus::rejected;
    return out;
}

void RadauSolver::step(double t_stop) {
    if (!(t_stop > t_)) {
        return;
    }
    if (need_initial_h_) {
        h_ = options_.h_init > 0.0
                 ? options_.h_init
                 : detail::initial_step(sys_, options_, t_, y_, f0_, t_stop, 5, counters_.rhs_evals);
        need_initial_h_ = false;
    }
    while (true) {
        double h = std::min(h_, options_.h_max);
        bool last = false;
        const double remaining = t_stop - t_;
        if (h >= remaining * (1.0 - 1e-12)) {
            // keep h (and its factorization) when the difference is round-off
            if (std::abs(h - remaining) > 1e-10 * h) {
                h = remaining;
            }
            last = true;
        }
        if (h < options_.h_min && !last) {
            throw IntegrationError("Radau: step size underflow", t_, h, y_);
        }
        IrkAttempt att = attempt_step(h);
        if (att.status == AttemptStatus::newton_failed) {
            ++counters_.newton_failures;
            if (options_.fixed_step) {
                throw IntegrationError("Radau: Newton iteration failed at fixed step size", t_, h, y_);
            }
            if (jac_current_) {
                h_ = 0.5 * h;
            } else {
                jac_age_ = options_.max_jacobian_age + 1;
                h_ = h;
            }
            have_last_ = false;
            continue;
        }
        if (att.status == AttemptStatus::rejected) {
            ++counters_.steps_rejected;
            const double fac = std::clamp(options_.safety * std::pow(att.err, -0.25), 0.2, 1.0);
            h_ = h * fac;
            if (!jac_current_) {
                jac_age_ = options_.max_jacobian_age + 1;
            }
            continue;
        }

        last_ = std::move(att.stages);
        t_ = last ? t_stop : t_ + h;
        y_ = last_.g[2];
        sys_.rhs(t_, y_, f0_);
        ++counters_.rhs_evals;
        have_last_ = true;
        jac_current_ = false;
        ++jac_age_;
        ++counters_.steps_accepted;
        if (after_restart_) {
            ++counters_.post_restart_steps;
            after_restart_ = false;
        }
        if (!options_.fixed_step) {
            const double fac = std::clamp(options_.safety * std::pow(att.err, -0.25), 0.2, 5.0);
            const double h_new = (fac >= 1.0 && fac < 1.2) ? h : h * fac;
            h_ = std::min(last ? std::max(h_new, h_) : h_new, options_.h_max);
        }
        return;
    }
}

Vector RadauSolver::dense_output(double t) const {
    if (last_.h == 0.0) {
        return y_;
    }
    return collocation_value(last_, (t - last_.t) / last_.h);
}

double RadauSolver::dense_component(double t, std::size_t i) const {
    if (last_.h == 0.0) {
        return y_[static_cast<Eigen::Index>(i)];
    }
    return collocation_component(last_, (t - last_.t) / last_.h, i);
}

CrossingSample RadauSolver::crossing_sample(std::size_t component) const {
    const auto& c = radau_iia_tableau().c;
    const auto k = static_cast<Eigen::Index>(component);
    CrossingSample s;
    s.t = {last_.t, last_.t + c[0] * last_.h, last_.t + c[1] * last_.h, last_.t + last_.h};
    s.z = {last_.y0[k], last_.g[0][k], last_.g[1][k], last_.g[2][k]};
    return s;
}

}  // namespace hybridsim
