#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>

namespace jcsim {

template <std::size_t N>
struct SimplexResult {
    std::array<double, N> x{};
    double value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Derivative-free Nelder-Mead minimization started from `x0` with an
/// axis-aligned initial simplex of the given step sizes. Stops once every
/// vertex lies within `xtol` (max-norm) of the best vertex, or after
/// `max_iterations` (converged = false).
template <std::size_t N, class F>
SimplexResult<N> nelder_mead(F&& f, std::array<double, N> x0, std::array<double, N> steps, double xtol,
                             std::size_t max_iterations = 500) {
    using Point = std::array<double, N>;
    constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;

    std::array<Point, N + 1> pts;
    std::array<double, N + 1> vals;
    pts[0] = x0;
    for (std::size_t i = 0; i < N; ++i) {
        pts[i + 1] = x0;
        pts[i + 1][i] += steps[i];
    }
    for (std::size_t i = 0; i <= N; ++i) vals[i] = f(pts[i]);

    auto combine = [](const Point& a, const Point& b, double t) {
        Point out;
        for (std::size_t i = 0; i < N; ++i) out[i] = a[i] + t * (b[i] - a[i]);
        return out;
    };

    SimplexResult<N> res;
    std::array<std::size_t, N + 1> order;
    for (res.iterations = 0; res.iterations < max_iterations; ++res.iterations) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[N - 1];

        double spread = 0.0;
        for (std::size_t i = 0; i <= N; ++i)
            for (std::size_t d = 0; d < N; ++d) spread = std::max(spread, std::abs(pts[i][d] - pts[best][d]));
        if (spread < xtol) {
            res.converged = true;
            break;
        }

        Point centroid{};
        for (std::size_t i = 0; i <= N; ++i)
            if (i != worst)
                for (std::size_t d = 0; d < N; ++d) centroid[d] += pts[i][d] / static_cast<double>(N);

        const Point reflected = combine(centroid, pts[worst], -kReflect);
        const double fr = f(reflected);
        if (fr < vals[best]) {
            const Point expanded = combine(centroid, pts[worst], -kExpand);
            const double fe = f(expanded);
            if (fe < fr) {
                pts[worst] = expanded;
                vals[worst] = fe;
            } else {
                pts[worst] = reflected;
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[worst] = reflected;
            vals[worst] = fr;
            continue;
        }
        const bool outside = fr < vals[worst];
        const Point contracted = outside ? combine(centroid, reflected, kContract) : combine(centroid, pts[worst], kContract);
        const double fc = f(contracted);
        if (fc < std::min(fr, vals[worst])) {
            pts[worst] = contracted;
            vals[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= N; ++i) {
            if (i == best) continue;
            pts[i] = combine(pts[best], pts[i], kShrink);
            vals[i] = f(pts[i]);
        }
    }

    const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
    res.x = pts[best];
    res.value = vals[best];
    return res;
}

} // namespace jcsim
