// Copyright 2026 The lbpursuit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lbp/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "lbp/error.hpp"

namespace lbp::lbfgs
{

namespace
{

struct Sample {
    double alpha;
    double f;
    double slope;
};

// Minimizer of the cubic through two samples, clamped into [lo, hi] with a
// bisection fallback.
double interpolate(const Sample& a, const Sample& b)
{
    const double lo = std::min(a.alpha, b.alpha);
    const double hi = std::max(a.alpha, b.alpha);
    if (std::isfinite(a.f) && std::isfinite(b.f)) {
        const double d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
        const double disc = d1 * d1 - a.slope * b.slope;
        if (disc >= 0.0) {
            const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
            const double t = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / (b.slope - a.slope + 2.0 * d2);
            const double margin = 0.1 * (hi - lo);
            if (std::isfinite(t) && t > lo + margin && t < hi - margin) {
                return t;
            }
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

Result minimize(const Function& fn, const Eigen::VectorXd& x0, const Options& opts)
{
    Result res;
    Eigen::VectorXd x = x0;
    Eigen::VectorXd g(x.size());
    double f = fn(x, g);
    res.evaluations = 1;
    if (!std::isfinite(f) || !g.allFinite()) {
        throw NumericalError("lbfgs: starting point is not admissible");
    }
    const double g_stop = opts.gradient_tolerance * std::max(1.0, g.norm());

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;
    Eigen::VectorXd xt(x.size()), gt(x.size());

    for (int it = 1; it <= opts.max_iterations; ++it) {
        res.iterations = it;
        if (g.norm() <= g_stop) {
            res.converged = true;
            break;
        }
        // Two-loop recursion.
        Eigen::VectorXd d = -g;
        std::vector<double> alpha(s_hist.size());
        for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
            alpha[i] = rho_hist[i] * s_hist[i].dot(d);
            d -= alpha[i] * y_hist[i];
        }
        if (!s_hist.empty()) {
            d *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(d);
            d += (alpha[i] - beta) * s_hist[i];
        }
        double slope0 = g.dot(d);
        if (!(slope0 < 0.0)) {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            d = -g;
            slope0 = -g.squaredNorm();
        }

        // Strong Wolfe search (bracket, then zoom).
        const Sample start{0.0, f, slope0};
        double step = s_hist.empty() ? std::min(1.0, 1.0 / std::max(g.norm(), 1e-300)) : 1.0;
        Sample prev = start;
        Sample lo{}, hi{};
        bool bracketed = false;
        bool found = false;
        double f_new = f;
        for (int ls = 0; ls < opts.max_line_search; ++ls) {
            xt = x + step * d;
            const double ft = fn(xt, gt);
            ++res.evaluations;
            const double st = std::isfinite(ft) ? gt.dot(d) : std::numeric_limits<double>::quiet_NaN();
            const Sample cur{step, ft, st};
            if (!bracketed) {
                if (!std::isfinite(ft) || ft > f + opts.wolfe_c1 * step * slope0 || (ls > 0 && ft >= prev.f)) {
                    lo = prev;
                    hi = cur;
                    bracketed = true;
                } else if (std::abs(st) <= -opts.wolfe_c2 * slope0) {
                    found = true;
                    f_new = ft;
                    break;
                } else if (st >= 0.0) {
                    lo = cur;
                    hi = prev;
                    bracketed = true;
                } else {
                    prev = cur;
                    step *= 2.0;
                    continue;
                }
            } else {
                if (!std::isfinite(ft) || ft > f + opts.wolfe_c1 * step * slope0 || ft >= lo.f) {
                    hi = cur;
                } else {
                    if (std::abs(st) <= -opts.wolfe_c2 * slope0) {
                        found = true;
                        f_new = ft;
                        break;
                    }
                    if (st * (hi.alpha - lo.alpha) >= 0.0) {
                        hi = lo;
                    }
                    lo = cur;
                }
            }
            step = std::isfinite(hi.f) ? interpolate(lo, hi) : 0.5 * (lo.alpha + hi.alpha);
            if (std::abs(hi.alpha - lo.alpha) < 1e-16 * std::max(1.0, lo.alpha)) {
                break;
            }
        }
        if (!found) {
            // Fall back to the best Armijo point of the bracket, if any.
            if (bracketed && lo.alpha > 0.0 && lo.f <= f + opts.wolfe_c1 * lo.alpha * slope0) {
                step = lo.alpha;
                xt = x + step * d;
                f_new = fn(xt, gt);
                ++res.evaluations;
            } else {
                break;
            }
        }

        const Eigen::VectorXd s = xt - x;
        const Eigen::VectorXd y = gt - g;
        const double sy = s.dot(y);
        const double decrease = f - f_new;
        x = xt;
        g = gt;
        f = f_new;
        if (sy > 1e-12 * s.norm() * y.norm()) {
            s_hist.push_back(s);
            y_hist.push_back(y);
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > opts.memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        if (decrease <= opts.value_tolerance * std::max(1.0, std::abs(f))) {
            res.converged = true;
            break;
        }
    }
    res.x = std::move(x);
    res.value = f;
    return res;
}

}  // namespace lbp::lbfgs
