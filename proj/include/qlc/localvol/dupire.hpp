#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "qlc/error.hpp"
#include "qlc/localvol/surface.hpp"
#include "qlc/marketdata/black.hpp"
#include "qlc/marketdata/quotes.hpp"
#include "qlc/math/tridiagonal.hpp"

namespace qlc {

/// Discretization of the forward equation for normalized call prices
/// c(T, y), y = log(K / F(T)):  dc/dT = 1/2 eta^2(T, e^y) (c_yy - c_y).
struct PdeGrid {
    double half_width = 2.5;          // y in [-half_width, half_width]
    std::size_t nodes = 1601;         // odd, so y = 0 is a node
    double concentration = 0.1;       // sinh stretching scale around y = 0
    double steps_per_year = 800.0;
    std::size_t min_steps_per_interval = 4;
    std::size_t rannacher_steps = 4;  // implicit half-steps after t = 0
    std::size_t initial_steps = 60;   // graded steps in the first interval

    void validate() const {
        if (nodes < 200) throw InvalidInput("pde grid: need at least 200 nodes");
        if (nodes % 2 == 0) throw InvalidInput("pde grid: node count must be odd");
        if (!(half_width > 0.0) || !(concentration > 0.0)) throw InvalidInput("pde grid: bad geometry");
        if (!(steps_per_year > 0.0) || min_steps_per_interval == 0) throw InvalidInput("pde grid: bad time stepping");
    }

    /// Grid spanning every quoted moneyness plus four ATM standard
    /// deviations at the longest maturity.
    static PdeGrid covering(const VolQuoteSurface& quotes, std::size_t nodes = 1601) {
        double max_abs_y = 0.0;
        for (const auto& s : quotes.slices()) {
            for (double k : s.moneyness) max_abs_y = std::max(max_abs_y, std::abs(std::log(k)));
        }
        const auto& last = quotes.slices().back();
        double max_vol = 0.0;
        for (const auto& s : quotes.slices()) {
            for (double v : s.vols) max_vol = std::max(max_vol, v);
        }
        const double atm_sd = last.atm_vol() * std::sqrt(last.maturity);
        PdeGrid g;
        g.nodes = nodes;
        g.half_width = std::max({max_abs_y + 4.0 * atm_sd, 6.0 * max_vol * std::sqrt(last.maturity), 1.0});
        return g;
    }

    [[nodiscard]] std::vector<double> build_nodes() const {
        validate();
        const std::size_t half = nodes / 2;
        const double c_max = std::asinh(half_width / concentration);
        std::vector<double> y(nodes);
        for (std::size_t j = 0; j < nodes; ++j) {
            const double c = c_max * (static_cast<double>(j) - static_cast<double>(half)) / static_cast<double>(half);
            y[j] = concentration * std::sinh(c);
        }
        y[half] = 0.0;
        return y;
    }
};

/// Forward Dupire solver over a fixed local-vol surface. One sweep marches
/// from T = 0 through all requested times.
class ForwardDupireSolver {
public:
    ForwardDupireSolver(const LocalVolSurface& surface, const PdeGrid& grid)
        : surface_(surface), grid_(grid), y_(grid.build_nodes()) {
        const std::size_t n = y_.size();
        k_.resize(n);
        for (std::size_t j = 0; j < n; ++j) k_[j] = std::exp(y_[j]);
        // first/second derivative stencils on the stretched grid
        lo_d1_.assign(n, 0.0);
        mid_d1_.assign(n, 0.0);
        hi_d1_.assign(n, 0.0);
        lo_d2_.assign(n, 0.0);
        mid_d2_.assign(n, 0.0);
        hi_d2_.assign(n, 0.0);
        for (std::size_t j = 1; j + 1 < n; ++j) {
            const double hm = y_[j] - y_[j - 1];
            const double hp = y_[j + 1] - y_[j];
            lo_d1_[j] = -hp / (hm * (hm + hp));
            mid_d1_[j] = (hp - hm) / (hm * hp);
            hi_d1_[j] = hm / (hp * (hm + hp));
            lo_d2_[j] = 2.0 / (hm * (hm + hp));
            mid_d2_[j] = -2.0 / (hm * hp);
            hi_d2_[j] = 2.0 / (hp * (hm + hp));
        }
    }

    [[nodiscard]] const std::vector<double>& log_moneyness() const { return y_; }

    /// Marches to each time in `times` (any order, t > 0) and calls
    /// visit(time, prices) with normalized call prices on the y grid.
    template <class Visitor>
    void sweep(std::vector<double> times, Visitor&& visit) const {
        std::sort(times.begin(), times.end());
        times.erase(std::unique(times.begin(), times.end()), times.end());
        if (times.empty()) return;
        if (!(times.front() > 0.0)) throw InvalidInput("dupire sweep: times must be positive");

        std::vector<double> knots = times;
        for (double t : surface_.maturities()) {
            if (t < times.back()) knots.push_back(t);
        }
        std::sort(knots.begin(), knots.end());
        knots.erase(std::unique(knots.begin(), knots.end(),
                                [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                    knots.end());

        const std::size_t n = y_.size();
        std::vector<double> c(n);
        for (std::size_t j = 0; j < n; ++j) c[j] = std::max(1.0 - k_[j], 0.0);
        const double left_bc = 1.0 - k_.front();
        const double right_bc = 0.0;

        std::vector<double> coef(n), a(n), b(n), u(n), rhs(n), scratch(n);
        std::size_t next_time = 0;
        std::size_t step_index = 0;
        std::size_t implicit_left = grid_.rannacher_steps;
        double t = 0.0;
        for (double knot : knots) {
            const double span = knot - t;
            if (span <= 0.0) continue;
            const double t_mid = 0.5 * (t + knot);
            const auto& spline = surface_.slice_spline(surface_.slice_index(t_mid));
            for (std::size_t j = 0; j < n; ++j) {
                const double v = spline(k_[j]);
                coef[j] = 0.5 * v * v;
            }
            auto m = std::max<std::size_t>(grid_.min_steps_per_interval,
                                           static_cast<std::size_t>(std::ceil(span * grid_.steps_per_year)));
            // quadratic grading away from the payoff kink at T = 0
            const bool graded = t == 0.0;
            if (graded) m = std::max(m, grid_.initial_steps);
            for (std::size_t s = 0; s < m; ++s) {
                const double dt = graded ? span * (static_cast<double>(2 * s + 1)) / static_cast<double>(m * m)
                                         : span / static_cast<double>(m);
                if (implicit_left > 0) {
                    // two implicit half-steps replace one Crank-Nicolson step
                    const std::size_t half_steps = std::min<std::size_t>(2, implicit_left);
                    for (std::size_t h = 0; h < half_steps; ++h) {
                        advance(c, coef, dt / static_cast<double>(half_steps), 1.0, left_bc, right_bc, a, b, u, rhs,
                                scratch);
                    }
                    implicit_left -= half_steps;
                } else {
                    advance(c, coef, dt, 0.5, left_bc, right_bc, a, b, u, rhs, scratch);
                }
                ++step_index;
                for (double v : {c[n / 4], c[n / 2], c[3 * n / 4]}) {
                    if (!std::isfinite(v)) {
                        throw NumericalFailure("dupire pde: non-finite price at step " + std::to_string(step_index) +
                                               " (t in [" + std::to_string(t) + ", " + std::to_string(knot) + "])");
                    }
                }
            }
            t = knot;
            while (next_time < times.size() && std::abs(times[next_time] - t) < 1e-12) {
                for (std::size_t j = 0; j < n; ++j) {
                    if (!std::isfinite(c[j])) {
                        throw NumericalFailure("dupire pde: non-finite price at step " +
                                               std::to_string(step_index) + " (t=" + std::to_string(t) + ")");
                    }
                }
                visit(times[next_time], std::span<const double>(c));
                ++next_time;
            }
        }
    }

    /// Cubic Lagrange interpolation of grid prices at moneyness k.
    [[nodiscard]] double price_at(std::span<const double> prices, double k) const {
        const double y = std::log(k);
        const std::size_t n = y_.size();
        if (y <= y_.front()) return prices.front();
        if (y >= y_.back()) return prices.back();
        const auto it = std::upper_bound(y_.begin(), y_.end(), y);
        std::size_t i = static_cast<std::size_t>(it - y_.begin()) - 1;
        if (y == y_[i]) return prices[i];
        std::size_t start = i == 0 ? 0 : i - 1;
        if (start + 4 > n) start = n - 4;
        double result = 0.0;
        for (std::size_t p = start; p < start + 4; ++p) {
            double w = 1.0;
            for (std::size_t q = start; q < start + 4; ++q) {
                if (q != p) w *= (y - y_[q]) / (y_[p] - y_[q]);
            }
            result += w * prices[p];
        }
        return result;
    }

private:
    void advance(std::vector<double>& c, const std::vector<double>& coef, double dt, double theta, double left_bc,
                 double right_bc, std::vector<double>& a, std::vector<double>& b, std::vector<double>& u,
                 std::vector<double>& rhs, std::vector<double>& scratch) const {
        const std::size_t n = c.size();
        for (std::size_t j = 1; j + 1 < n; ++j) {
            const double lo = coef[j] * (lo_d2_[j] - lo_d1_[j]);
            const double mid = coef[j] * (mid_d2_[j] - mid_d1_[j]);
            const double hi = coef[j] * (hi_d2_[j] - hi_d1_[j]);
            const double explicit_part = lo * c[j - 1] + mid * c[j] + hi * c[j + 1];
            rhs[j] = c[j] + (1.0 - theta) * dt * explicit_part;
            a[j] = -theta * dt * lo;
            b[j] = 1.0 - theta * dt * mid;
            u[j] = -theta * dt * hi;
        }
        a[0] = 0.0;
        b[0] = 1.0;
        u[0] = 0.0;
        rhs[0] = left_bc;
        a[n - 1] = 0.0;
        b[n - 1] = 1.0;
        u[n - 1] = 0.0;
        rhs[n - 1] = right_bc;
        math::solve_tridiagonal(a, b, u, rhs, scratch);
        c.swap(rhs);
    }

    const LocalVolSurface& surface_;
    PdeGrid grid_;
    std::vector<double> y_;
    std::vector<double> k_;
    std::vector<double> lo_d1_, mid_d1_, hi_d1_, lo_d2_, mid_d2_, hi_d2_;
};

namespace detail {

// Implied vol of a normalized (unit forward, undiscounted) call price,
// inverted on the out-of-the-money leg.
inline double normalized_implied_vol(double call_price, double k, double t) {
    if (k < 1.0) {
        const double put = call_price - (1.0 - k);
        return implied_vol(std::max(put, 0.0), 1.0, k, t, 1.0, OptionKind::Put);
    }
    return implied_vol(std::max(call_price, 0.0), 1.0, k, t, 1.0, OptionKind::Call);
}

}  // namespace detail

/// Model implied vols at every quote node, from one forward sweep.
inline std::vector<std::vector<double>> dupire_reprice(const LocalVolSurface& surface, const PdeGrid& grid,
                                                       const VolQuoteSurface& quotes) {
    ForwardDupireSolver solver(surface, grid);
    std::vector<double> times;
    for (const auto& s : quotes.slices()) times.push_back(s.maturity);
    std::vector<std::vector<double>> out(quotes.size());
    std::size_t i = 0;
    solver.sweep(times, [&](double t, std::span<const double> prices) {
        const auto& slice = quotes[i];
        auto& row = out[i];
        row.resize(slice.moneyness.size());
        for (std::size_t j = 0; j < slice.moneyness.size(); ++j) {
            const double k = slice.moneyness[j];
            try {
                row[j] = detail::normalized_implied_vol(solver.price_at(prices, k), k, t);
            } catch (const NoSolution& e) {
                throw NumericalFailure(std::string("dupire reprice: cannot invert model price at t=") +
                                       std::to_string(t) + ", k=" + std::to_string(k) + ": " + e.what());
            }
        }
        ++i;
    });
    return out;
}

/// ATM implied vol term structure of a local-vol surface, sampled on a fixed
/// time grid and interpolated in total variance.
class AtmVolCurve {
public:
    AtmVolCurve() = default;

    /// `times` strictly increasing and starting at 0; vols[0] is the
    /// short-time limit.
    AtmVolCurve(std::vector<double> times, std::vector<double> vols) : times_(std::move(times)), vols_(std::move(vols)) {
        if (times_.empty() || times_.size() != vols_.size() || times_.front() != 0.0) {
            throw InvalidInput("atm vol curve: need matching grids starting at t = 0");
        }
        for (std::size_t i = 0; i < times_.size(); ++i) {
            if (!(vols_[i] > 0.0)) throw InvalidInput("atm vol curve: vols must be positive");
            if (i > 0 && !(times_[i] > times_[i - 1])) throw InvalidInput("atm vol curve: times must increase");
        }
    }

    static AtmVolCurve flat(double vol) { return AtmVolCurve({0.0}, {vol}); }

    [[nodiscard]] double operator()(double t) const {
        if (t <= 0.0 || times_.size() == 1) return vols_.front();
        if (t >= times_.back()) return vols_.back();
        const auto it = std::upper_bound(times_.begin(), times_.end(), t);
        const auto i = static_cast<std::size_t>(it - times_.begin());
        const double t0 = times_[i - 1], t1 = times_[i];
        const double w = (t - t0) / (t1 - t0);
        if (i == 1) return vols_[0] + w * (vols_[1] - vols_[0]);
        const double w0 = vols_[i - 1] * vols_[i - 1] * t0;
        const double w1 = vols_[i] * vols_[i] * t1;
        return std::sqrt((w0 + w * (w1 - w0)) / t);
    }

    [[nodiscard]] const std::vector<double>& times() const { return times_; }
    [[nodiscard]] const std::vector<double>& vols() const { return vols_; }

private:
    std::vector<double> times_;
    std::vector<double> vols_;
};

/// ATM (k = 1) implied vols at the requested times from one forward sweep.
/// t = 0 maps to the local vol at the money, the short-time limit.
inline std::vector<double> atm_vol_curve(const LocalVolSurface& surface, const PdeGrid& grid,
                                         const std::vector<double>& times) {
    std::vector<double> positive;
    for (double t : times) {
        if (t < 0.0) throw InvalidInput("atm_vol_curve: negative time");
        if (t > 0.0) positive.push_back(t);
    }
    ForwardDupireSolver solver(surface, grid);
    const std::size_t atm_node = grid.nodes / 2;
    std::vector<std::pair<double, double>> solved;
    solver.sweep(positive, [&](double t, std::span<const double> prices) {
        solved.emplace_back(t, detail::normalized_implied_vol(prices[atm_node], 1.0, t));
    });
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) {
        if (t == 0.0) {
            out.push_back(surface(0.0, 1.0));
            continue;
        }
        const auto it = std::lower_bound(solved.begin(), solved.end(), std::make_pair(t, -1.0));
        out.push_back(it->second);
    }
    return out;
}

/// Dense ATM curve on [0, horizon] with the given spacing.
inline AtmVolCurve make_atm_curve(const LocalVolSurface& surface, const PdeGrid& grid, double horizon,
                                  double spacing = 1.0 / 365.0) {
    const auto count = static_cast<std::size_t>(std::ceil(horizon / spacing - 1e-9));
    std::vector<double> times(count + 1);
    for (std::size_t i = 0; i <= count; ++i) times[i] = std::min(horizon, static_cast<double>(i) * spacing);
    return AtmVolCurve(times, atm_vol_curve(surface, grid, times));
}

}  // namespace qlc
