#include "lsv/pde.hpp"

#include "lsv/errors.hpp"
#include "lsv/numeric.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace lsv {

namespace {

struct Vanilla {
    double strike;
    double maturity;
    bool call;
};

Vanilla as_vanilla(const Product& product, const char* who) {
    if (const auto* c = std::get_if<VanillaCall>(&product)) return {c->strike, c->maturity, true};
    if (const auto* p = std::get_if<VanillaPut>(&product)) return {p->strike, p->maturity, false};
    throw InputError(std::string(who) + ": only vanilla calls and puts are supported");
}

// Solves a tridiagonal system in place; lower[0] and upper[n-1] are ignored.
void thomas(std::vector<double>& lower, std::vector<double>& diag, std::vector<double>& upper,
            std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = lower[i] / diag[i - 1];
        diag[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
    }
}

// Node-aligned uniform grid: `center` is a node, the span covers [lo, hi].
std::vector<double> aligned_grid(double center, double lo, double hi, double step) {
    const auto below = static_cast<long>(std::ceil((center - lo) / step - 1e-12));
    const auto above = static_cast<long>(std::ceil((hi - center) / step - 1e-12));
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(below + above + 1));
    for (long k = -below; k <= above; ++k) g.push_back(center + static_cast<double>(k) * step);
    return g;
}

class LineSolver {
public:
    LineSolver(std::vector<double> x, double rate)
        : x_(std::move(x)), s_(x_.size()), r_(rate) {
        for (std::size_t i = 0; i < x_.size(); ++i) s_[i] = std::exp(x_[i]);
        h_ = x_[1] - x_[0];
        const std::size_t n = x_.size();
        w_lo_ = (s_[0] - s_[1]) / (s_[2] - s_[1]);
        w_hi_ = (s_[n - 1] - s_[n - 2]) / (s_[n - 3] - s_[n - 2]);
        lower_.resize(n - 2);
        diag_.resize(n - 2);
        upper_.resize(n - 2);
        rhs_.resize(n - 2);
        a_.resize(n);
        b_.resize(n);
        c_.resize(n);
    }

    // One theta step of u_t + adv u_x + 1/2 var u_xx - r u = 0 backward over dt,
    // where var_i and drift_i (of s) are given per node.
    void step(std::span<double> u, std::span<const double> var, std::span<const double> drift,
              double dt, double theta) {
        const std::size_t n = x_.size();
        const double h2 = h_ * h_;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double adv = drift[i] - 0.5 * var[i];
            double lo = 0.5 * var[i] / h2;
            double up = lo;
            if (std::abs(adv) * h_ > var[i]) {
                if (adv > 0.0) up += adv / h_; else lo -= adv / h_;
            } else {
                lo -= 0.5 * adv / h_;
                up += 0.5 * adv / h_;
            }
            a_[i] = lo;
            c_[i] = up;
            b_[i] = -lo - up - r_;
        }
        const double ex = (1.0 - theta) * dt;
        const double im = theta * dt;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const std::size_t k = i - 1;
            rhs_[k] = u[i] + ex * (a_[i] * u[i - 1] + b_[i] * u[i] + c_[i] * u[i + 1]);
            lower_[k] = -im * a_[i];
            diag_[k] = 1.0 - im * b_[i];
            upper_[k] = -im * c_[i];
        }
        // Linear-in-s extrapolation of the two boundary nodes, eliminated from the system.
        diag_[0] += lower_[0] * (1.0 - w_lo_);
        upper_[0] += lower_[0] * w_lo_;
        const std::size_t last = n - 3;
        diag_[last] += upper_[last] * (1.0 - w_hi_);
        lower_[last] += upper_[last] * w_hi_;
        thomas(lower_, diag_, upper_, rhs_);
        for (std::size_t i = 1; i + 1 < n; ++i) u[i] = rhs_[i - 1];
        u[0] = (1.0 - w_lo_) * u[1] + w_lo_ * u[2];
        u[n - 1] = (1.0 - w_hi_) * u[n - 2] + w_hi_ * u[n - 3];
    }

    const std::vector<double>& spots() const { return s_; }

private:
    std::vector<double> x_;
    std::vector<double> s_;
    double r_;
    double h_ = 0.0;
    double w_lo_ = 0.0;
    double w_hi_ = 0.0;
    std::vector<double> lower_, diag_, upper_, rhs_;
    std::vector<double> a_, b_, c_;
};

}  // namespace

PdeResult price_pde(const Product& product, const ModelParams& model, std::span<const double> grid,
                    std::span<const double> y, std::span<const double> dy, const PdeGrid& pde) {
    const Vanilla v = as_vanilla(product, "price_pde");
    validate(product);
    model.validate();
    if (grid.size() != y.size() || grid.size() != dy.size() || grid.empty()) {
        throw InputError("price_pde: grid, y and dy lengths differ");
    }
    if (grid.back() < v.maturity * (1.0 - 1e-12)) {
        throw InputError("price_pde: factor path is shorter than the product maturity");
    }
    if (pde.spot_nodes < 5 || pde.time_steps < 1 || pde.average_nodes < 2) {
        throw InputError("price_pde: grid too small");
    }
    const auto coeffs = conditional_coeffs(y, dy, model.ou, model.rho);
    const double T = v.maturity;

    std::vector<double> sig2;
    for (std::size_t i = 0; i < grid.size() && grid[i] <= T; ++i) sig2.push_back(coeffs.sig[i] * coeffs.sig[i]);
    const double ref_vol = std::max(0.05, model.localvol(model.s0 / model.a0) * std::sqrt(mean(sig2)));
    const double x0 = std::log(model.s0);
    double half = pde.std_devs * ref_vol * std::sqrt(T);
    half = std::max(half, std::abs(std::log(v.strike / model.s0)) + 4.0 * ref_vol * std::sqrt(T));
    const double hx = 2.0 * half / static_cast<double>(pde.spot_nodes - 1);
    auto xs = aligned_grid(x0, x0 - half, x0 + half, hx);
    const std::size_t ns = xs.size();
    const auto i0 = static_cast<std::size_t>(std::llround((x0 - xs.front()) / hx));

    const bool frozen = model.kappa_kernel == 0.0;
    std::vector<double> la;  // log average nodes
    if (frozen) {
        la = {std::log(model.a0)};
    } else {
        const double ha = (xs.back() - xs.front()) / static_cast<double>(pde.average_nodes - 2);
        la = aligned_grid(std::log(model.a0), std::min(xs.front(), std::log(model.a0)),
                          std::max(xs.back(), std::log(model.a0)), ha);
    }
    const std::size_t na = la.size();
    const auto j0 = frozen ? std::size_t{0}
                           : static_cast<std::size_t>(std::llround((std::log(model.a0) - la.front()) /
                                                                   (la[1] - la[0])));
    std::vector<double> as(na);
    for (std::size_t j = 0; j < na; ++j) as[j] = std::exp(la[j]);

    LineSolver solver(xs, model.r);
    const auto& ss = solver.spots();

    // sigma_loc(s_i / A_j), row-major by average node.
    std::vector<double> lv(ns * na);
    for (std::size_t j = 0; j < na; ++j) {
        for (std::size_t i = 0; i < ns; ++i) lv[j * ns + i] = model.localvol(ss[i] / as[j]);
    }

    std::vector<double> u(ns * na);
    for (std::size_t j = 0; j < na; ++j) {
        for (std::size_t i = 0; i < ns; ++i) {
            u[j * ns + i] = v.call ? std::max(ss[i] - v.strike, 0.0) : std::max(v.strike - ss[i], 0.0);
        }
    }

    // Upwind advection data: per spot row, the number of substeps keeping the
    // Courant number below target.
    const std::size_t steps = pde.time_steps;
    const double dt = T / static_cast<double>(steps);
    std::vector<std::size_t> substeps(ns, 1);
    std::size_t max_sub = 1;
    const bool upwind = pde.advection == AdvectionScheme::upwind;
    if (!frozen && upwind) {
        for (std::size_t i = 0; i < ns; ++i) {
            double c = 0.0;
            for (std::size_t j = 0; j < na; ++j) {
                const double speed = model.kappa_kernel * (ss[i] - as[j]);
                const double da = speed > 0.0 ? (j + 1 < na ? as[j + 1] - as[j] : 0.0)
                                              : (j > 0 ? as[j] - as[j - 1] : 0.0);
                if (da > 0.0) c = std::max(c, std::abs(speed) * dt / da);
            }
            substeps[i] = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(c / pde.courant)));
            max_sub = std::max(max_sub, substeps[i]);
        }
    }

    std::vector<double> var(ns), drift(ns), line(na), next(na);
    const double carry = model.r - model.q;
    auto diffuse = [&](double t, double h, double theta) {
        const double mu = interpolate(grid, coeffs.mu, t);
        const double sg = interpolate(grid, coeffs.sig, t);
        for (std::size_t j = 0; j < na; ++j) {
            const double* l = &lv[j * ns];
            for (std::size_t i = 0; i < ns; ++i) {
                const double vol = sg * l[i];
                var[i] = vol * vol;
                drift[i] = carry + mu * l[i];
            }
            solver.step(std::span<double>(&u[j * ns], ns), var, drift, h, theta);
        }
    };
    // Semi-Lagrangian data: departure point of node (i, j) over one step and
    // the 4-point Lagrange stencil in log A around it.
    std::vector<std::size_t> base;
    std::vector<std::array<double, 4>> weights;
    if (!frozen && !upwind) {
        base.resize(ns * na);
        weights.resize(ns * na);
        const double decay = std::exp(-model.kappa_kernel * dt);
        const double ha = la[1] - la[0];
        for (std::size_t j = 0; j < na; ++j) {
            for (std::size_t i = 0; i < ns; ++i) {
                const double dep = std::log(ss[i] + (as[j] - ss[i]) * decay);
                const double pos = std::clamp((dep - la.front()) / ha, 0.0, static_cast<double>(na - 1));
                long k = static_cast<long>(std::floor(pos)) - 1;
                k = std::clamp<long>(k, 0, static_cast<long>(na) - 4);
                if (na < 4) k = 0;
                const std::size_t npts = std::min<std::size_t>(4, na);
                std::array<double, 4> w{};
                for (std::size_t a = 0; a < npts; ++a) {
                    double l = 1.0;
                    for (std::size_t b = 0; b < npts; ++b) {
                        if (a == b) continue;
                        l *= (pos - static_cast<double>(k + static_cast<long>(b))) /
                             static_cast<double>(static_cast<long>(a) - static_cast<long>(b));
                    }
                    w[a] = l;
                }
                base[j * ns + i] = static_cast<std::size_t>(k);
                weights[j * ns + i] = w;
            }
        }
    }
    std::vector<double> scratch(frozen || upwind ? 0 : ns * na);
    auto advect = [&](double h) {
        if (frozen) return;
        if (!upwind) {
            const std::size_t npts = std::min<std::size_t>(4, na);
            for (std::size_t j = 0; j < na; ++j) {
                for (std::size_t i = 0; i < ns; ++i) {
                    const std::size_t k = base[j * ns + i];
                    const auto& w = weights[j * ns + i];
                    double v = 0.0;
                    for (std::size_t a = 0; a < npts; ++a) v += w[a] * u[(k + a) * ns + i];
                    scratch[j * ns + i] = v;
                }
            }
            u.swap(scratch);
            return;
        }
        for (std::size_t i = 0; i < ns; ++i) {
            for (std::size_t j = 0; j < na; ++j) line[j] = u[j * ns + i];
            const double sub = h / static_cast<double>(substeps[i]);
            for (std::size_t k = 0; k < substeps[i]; ++k) {
                for (std::size_t j = 0; j < na; ++j) {
                    const double speed = model.kappa_kernel * (ss[i] - as[j]);
                    double d = 0.0;
                    if (speed > 0.0 && j + 1 < na) {
                        d = (line[j + 1] - line[j]) / (as[j + 1] - as[j]);
                    } else if (speed < 0.0 && j > 0) {
                        d = (line[j] - line[j - 1]) / (as[j] - as[j - 1]);
                    }
                    next[j] = line[j] + sub * speed * d;
                }
                line.swap(next);
            }
            for (std::size_t j = 0; j < na; ++j) u[j * ns + i] = line[j];
        }
    };

    const std::size_t rannacher_full = std::min(steps, pde.rannacher_steps / 2);
    for (std::size_t n = steps; n-- > 0;) {
        const double t_hi = T * static_cast<double>(n + 1) / static_cast<double>(steps);
        const double t_lo = T * static_cast<double>(n) / static_cast<double>(steps);
        advect(dt);
        if (steps - n <= rannacher_full) {
            const double t_mid = 0.5 * (t_lo + t_hi);
            diffuse(t_mid, 0.5 * dt, 1.0);
            diffuse(t_lo, 0.5 * dt, 1.0);
        } else {
            diffuse(0.5 * (t_lo + t_hi), dt, 0.5);
        }
    }

    PdeResult res;
    res.value = u[j0 * ns + i0];
    res.time_steps = steps;
    res.max_substeps = max_sub;
    return res;
}

PriceResult price_pde(const Product& product, const ModelParams& model, const QuantizerSet& q,
                      const PdeGrid& pde, unsigned threads) {
    as_vanilla(product, "price_pde");
    if (q.size() == 0) throw InputError("price_pde: empty quantizer");
    if (q.horizon < maturity(product) * (1.0 - 1e-12)) {
        throw InputError("price_pde: quantizer horizon is shorter than the product maturity");
    }
    PriceResult r;
    r.engine = "pde";
    r.product = product_name(product);
    r.probs = q.probs;
    r.per_quantizer.resize(q.size());
    r.per_quantizer_se.assign(q.size(), 0.0);
    parallel_for(q.size(), threads, [&](std::size_t i) {
        r.per_quantizer[i] = price_pde(product, model, q.grid, q.paths[i], q.dpaths[i], pde).value;
    });
    std::vector<double> w(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) w[i] = q.probs[i] * r.per_quantizer[i];
    r.assembled = pairwise_sum(w);
    r.value = r.assembled;
    return r;
}

}  // namespace lsv
