#include "dg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "dg/errors.hpp"

namespace dg {

namespace {

CorrelationMap map_shell(const EnsembleAccumulator& acc,
                         const LatticeGeometry& geom) {
    if (!acc.has_center)
        throw ConfigError(
            "correlation map requested but the ensemble tracked no center "
            "site (even extent or correlation tracking disabled)");
    if (acc.n_sites != geom.n_sites())
        throw DimensionError("accumulator/geometry site count mismatch");
    CorrelationMap map;
    map.extent = geom.extent;
    map.two_d = geom.kind == LatticeKind::Square2D;
    map.center = acc.center;
    map.count = acc.count;
    map.values.resize(acc.n_sites);
    map.stderrs.resize(acc.n_sites);
    return map;
}

struct LineFit {
    double slope = 0.0, intercept = 0.0, rms = 0.0;
};

LineFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = n * sxx - sx * sx;
    LineFit f;
    f.slope = (n * sxy - sx * sy) / det;
    f.intercept = (sy - f.slope * sx) / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ss += r * r;
    }
    f.rms = std::sqrt(ss / n);
    return f;
}

/// Contiguous window of displacements starting at i = 1: every point must
/// sit above the noise floor; the window ends at the first that does not.
std::pair<std::size_t, std::size_t> decay_window(const std::vector<double>& g,
                                                 double noise_floor) {
    std::size_t hi = 0;
    for (std::size_t i = 1; i < g.size(); ++i) {
        if (!(g[i] > noise_floor)) break;
        hi = i;
    }
    return {1, hi};
}

}  // namespace

CorrelationMap correlation_map(const EnsembleAccumulator& acc,
                               const LatticeGeometry& geom) {
    CorrelationMap map = map_shell(acc, geom);
    for (std::size_t s = 0; s < acc.n_sites; ++s) {
        map.values[s] = std::abs(acc.wpair_stat[s].mean);
        map.stderrs[s] = acc.wpair_stat[s].stderr_of_mean(acc.count);
    }
    return map;
}

CorrelationMap correlation_map_at(const EnsembleAccumulator& acc,
                                  const LatticeGeometry& geom,
                                  std::size_t sample) {
    if (sample >= acc.n_samples)
        throw DimensionError("sample index out of range");
    CorrelationMap map = map_shell(acc, geom);
    const std::size_t base = sample * acc.n_sites;
    for (std::size_t s = 0; s < acc.n_sites; ++s) {
        map.values[s] = std::abs(acc.pair_stat[base + s].mean);
        map.stderrs[s] = acc.pair_stat[base + s].stderr_of_mean(acc.count);
    }
    return map;
}

std::vector<double> project_1d(const CorrelationMap& map) {
    const std::size_t L = map.extent;
    const std::size_t half = (L - 1) / 2;
    std::vector<double> g(half + 1);
    if (map.two_d) {
        const std::size_t cr = map.center / L, cc = map.center % L;
        for (std::size_t i = 0; i <= half; ++i)
            g[i] = 0.5 * (map.at(cr, cc + i) + map.at(cr + i, cc));
    } else {
        for (std::size_t i = 0; i <= half; ++i)
            g[i] = 0.5 * (map.values[map.center + i] + map.values[map.center - i]);
    }
    return g;
}

std::vector<double> project_1d_stderr(const CorrelationMap& map) {
    const std::size_t L = map.extent;
    const std::size_t half = (L - 1) / 2;
    std::vector<double> se(half + 1);
    auto combine = [](double a, double b) { return 0.5 * std::hypot(a, b); };
    if (map.two_d) {
        const std::size_t cr = map.center / L, cc = map.center % L;
        se[0] = map.stderrs[cr * L + cc];
        for (std::size_t i = 1; i <= half; ++i)
            se[i] = combine(map.stderrs[cr * L + cc + i],
                            map.stderrs[(cr + i) * L + cc]);
    } else {
        se[0] = map.stderrs[map.center];
        for (std::size_t i = 1; i <= half; ++i)
            se[i] = combine(map.stderrs[map.center + i],
                            map.stderrs[map.center - i]);
    }
    return se;
}

FitResult fit_exponential(const std::vector<double>& g, double noise_floor) {
    const auto [lo, hi] = decay_window(g, noise_floor);
    if (hi < lo || hi - lo + 1 < 3)
        throw InsufficientDataError(
            "fewer than 3 displacements above the noise floor; correlation "
            "length below resolution");
    std::vector<double> x, y;
    for (std::size_t i = lo; i <= hi; ++i) {
        x.push_back(static_cast<double>(i));
        y.push_back(std::log(g[i]));
    }
    const LineFit f = linear_fit(x, y);
    if (!(f.slope < 0.0))
        throw InsufficientDataError("correlation does not decay with distance");
    FitResult res;
    res.kind = FitKind::Exponential;
    res.amplitude = std::exp(f.intercept);
    res.rate_or_length = -1.0 / f.slope;
    res.residual_rms = f.rms;
    res.win_lo = lo;
    res.win_hi = hi;
    return res;
}

FitResult fit_power_law(const std::vector<double>& g, double noise_floor) {
    const auto [lo, hi] = decay_window(g, noise_floor);
    if (hi < lo || hi - lo + 1 < 3)
        throw InsufficientDataError(
            "fewer than 3 displacements above the noise floor; correlation "
            "length below resolution");
    std::vector<double> x, y;
    for (std::size_t i = lo; i <= hi; ++i) {
        x.push_back(std::log(static_cast<double>(i)));
        y.push_back(std::log(g[i]));
    }
    const LineFit f = linear_fit(x, y);
    if (!(f.slope < 0.0))
        throw InsufficientDataError("correlation does not decay with distance");
    FitResult res;
    res.kind = FitKind::PowerLaw;
    res.amplitude = std::exp(f.intercept);
    res.rate_or_length = -f.slope;
    res.residual_rms = f.rms;
    res.win_lo = lo;
    res.win_hi = hi;
    return res;
}

FitResult fit_relaxation(const std::vector<double>& times,
                         const std::vector<double>& series) {
    if (times.size() != series.size())
        throw DimensionError("times/series length mismatch");
    const std::size_t n = series.size();
    if (n < 10)
        throw InsufficientDataError("relaxation fit needs at least 10 samples");

    // Plateau estimate: mean and scatter over the final 10% of samples.
    const std::size_t tail_len = std::max<std::size_t>(2, n / 10);
    const std::size_t tail_begin = n - tail_len;
    double o_inf = 0.0;
    for (std::size_t k = tail_begin; k < n; ++k) o_inf += series[k];
    o_inf /= static_cast<double>(tail_len);
    double ss = 0.0;
    for (std::size_t k = tail_begin; k < n; ++k) {
        const double d = series[k] - o_inf;
        ss += d * d;
    }
    const double tail_sd = std::sqrt(ss / static_cast<double>(tail_len - 1));
    const double threshold = 3.0 * tail_sd;

    // Fit window: from the peak deviation, for as long as the deviation
    // stays clear of the tail noise.
    std::size_t peak = 0;
    double peak_val = -1.0;
    for (std::size_t k = 0; k < tail_begin; ++k) {
        const double d = std::abs(o_inf - series[k]);
        if (d > peak_val) {
            peak_val = d;
            peak = k;
        }
    }
    std::size_t hi = peak;
    for (std::size_t k = peak; k < n; ++k) {
        if (!(std::abs(o_inf - series[k]) > threshold)) break;
        hi = k;
    }
    if (hi < peak || hi - peak + 1 < 3)
        throw RateUnresolvableError(
            "no decay window above the tail noise; relaxation rate below "
            "resolution");

    std::vector<double> x, y;
    for (std::size_t k = peak; k <= hi; ++k) {
        x.push_back(times[k]);
        y.push_back(std::log(std::abs(o_inf - series[k])));
    }
    const LineFit f = linear_fit(x, y);
    if (!(f.slope < 0.0))
        throw RateUnresolvableError("deviation from the plateau does not decay");
    FitResult res;
    res.kind = FitKind::RelaxationExponential;
    res.amplitude = std::exp(f.intercept);
    res.rate_or_length = -f.slope;
    res.residual_rms = f.rms;
    res.win_lo = peak;
    res.win_hi = hi;
    res.offset = o_inf;
    return res;
}

double default_noise_floor(const CorrelationMap& map) {
    const std::size_t L = map.extent;
    const std::size_t half = (L - 1) / 2;
    std::vector<double> ring;
    if (map.two_d) {
        const std::size_t cr = map.center / L, cc = map.center % L;
        for (std::size_t r = 0; r < L; ++r)
            for (std::size_t c = 0; c < L; ++c) {
                const std::size_t dr = r > cr ? r - cr : cr - r;
                const std::size_t dc = c > cc ? c - cc : cc - c;
                if (std::max(dr, dc) == half) ring.push_back(map.stderrs[r * L + c]);
            }
    } else {
        for (std::size_t i = 0; i < L; ++i) {
            const std::size_t d = i > map.center ? i - map.center : map.center - i;
            if (d == half) ring.push_back(map.stderrs[i]);
        }
    }
    std::sort(ring.begin(), ring.end());
    const std::size_t m = ring.size();
    const double median =
        m % 2 ? ring[m / 2] : 0.5 * (ring[m / 2 - 1] + ring[m / 2]);
    return 3.0 * median;
}

}  // namespace dg
