#include "shakekey/feature.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "fft.hpp"
#include "shakekey/kernels.hpp"

namespace shakekey {

namespace {

// Cyclic Jacobi diagonalization of a symmetric 3x3 matrix. a is destroyed;
// on return its diagonal holds the eigenvalues and the columns of v the
// eigenvectors. Deterministic pivot order (0,1),(0,2),(1,2).
void jacobi3(double a[3][3], double v[3][3]) {
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) v[r][c] = (r == c) ? 1.0 : 0.0;

    const double scale = std::abs(a[0][0]) + std::abs(a[1][1]) + std::abs(a[2][2]) +
                         2.0 * (std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]));
    if (scale == 0.0) return;

    constexpr int kMaxSweeps = 64;
    constexpr int kPairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        const double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
        if (off <= scale * 1e-17) break;
        for (const auto& pq : kPairs) {
            const int p = pq[0], q = pq[1];
            const double apq = a[p][q];
            if (apq == 0.0) continue;
            const double theta = (a[q][q] - a[p][p]) / (2.0 * apq);
            const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                             (std::abs(theta) + std::sqrt(theta * theta + 1.0));
            const double c = 1.0 / std::sqrt(t * t + 1.0);
            const double s = t * c;
            const double tau = s / (1.0 + c);
            const double h = t * apq;
            a[p][p] -= h;
            a[q][q] += h;
            a[p][q] = a[q][p] = 0.0;
            const int r = 3 - p - q;  // the remaining index
            {
                const double g = a[r][p], w = a[r][q];
                a[r][p] = a[p][r] = g - s * (w + tau * g);
                a[r][q] = a[q][r] = w + s * (g - tau * w);
            }
            for (int i = 0; i < 3; ++i) {
                const double g = v[i][p], w = v[i][q];
                v[i][p] = g - s * (w + tau * g);
                v[i][q] = w + s * (g - tau * w);
            }
        }
    }
}

// Canonical orientation for a standalone decomposition: largest-|component|
// entry of each eigenvector made positive, first index on ties.
void orient_eigenvector(std::array<double, 3>& u) {
    int best = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(u[i]) > std::abs(u[best])) best = i;
    if (u[best] < 0.0)
        for (double& c : u) c = -c;
}

}  // namespace

CenteredWindow center(const MotionTrace& window) {
    if (window.size() < 2)
        throw TooFewSamples("centering needs at least 2 samples, got " +
                            std::to_string(window.size()));
    const std::size_t n = window.size();
    const double inv_n = 1.0 / static_cast<double>(n);

    CenteredWindow out;
    const std::vector<double>* axes[3] = {&window.ax, &window.ay, &window.az};
    for (int r = 0; r < 3; ++r) {
        out.means[r] = kernels::sum(*axes[r]) * inv_n;
        out.rows[r].resize(n);
        kernels::subtract_scalar(*axes[r], out.means[r], out.rows[r]);
    }
    return out;
}

PcaDecomposition principal_axes(const CenteredWindow& centered) {
    if (centered.cols() < 2)
        throw TooFewSamples("PCA needs at least 2 samples");

    double scatter[3][3];
    for (int r = 0; r < 3; ++r)
        for (int c = r; c < 3; ++c)
            scatter[r][c] = scatter[c][r] = kernels::dot(centered.rows[r], centered.rows[c]);

    PcaDecomposition out;
    out.per_axis_means = centered.means;

    double frob = 0.0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) frob += scatter[r][c] * scatter[r][c];
    if (frob == 0.0) {
        out.degenerate = true;
        for (int k = 0; k < 3; ++k) out.eigenvectors[k][k] = 1.0;
        return out;
    }

    double v[3][3];
    jacobi3(scatter, v);

    std::array<int, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
        return std::abs(scatter[i][i]) > std::abs(scatter[j][j]);
    });
    for (int k = 0; k < 3; ++k) {
        const int src = order[k];
        out.eigenvalues[k] = std::max(scatter[src][src], 0.0);
        for (int i = 0; i < 3; ++i) out.eigenvectors[k][i] = v[i][src];
        orient_eigenvector(out.eigenvectors[k]);
    }
    return out;
}

PcaDecomposition principal_axes(const MotionTrace& window) {
    return principal_axes(center(window));
}

FeatureSeries project_first_pc(const MotionTrace& window) {
    const CenteredWindow centered = center(window);
    const PcaDecomposition pca = principal_axes(centered);
    if (pca.degenerate)
        throw DegenerateInput("constant window has no principal direction");

    FeatureSeries out;
    out.sample_rate = window.sample_rate;
    out.values.resize(window.size());
    kernels::project3(window.ax, window.ay, window.az, pca.per_axis_means,
                      pca.eigenvectors[0], out.values);

    std::size_t peak = 0;
    for (std::size_t i = 1; i < out.values.size(); ++i)
        if (std::abs(out.values[i]) > std::abs(out.values[peak])) peak = i;
    if (out.values[peak] < 0.0)
        for (double& x : out.values) x = -x;
    out.sign_convention_applied = true;
    return out;
}

double coherence(const FeatureSeries& a, const FeatureSeries& b, FrequencyBand band) {
    if (a.values.size() != b.values.size() || a.sample_rate != b.sample_rate)
        throw LengthMismatch("coherence inputs must share length and rate");
    if (band.lo_hz > band.hi_hz || band.lo_hz < 0.0)
        throw std::invalid_argument("invalid frequency band");

    constexpr std::size_t kSegment = 64;
    constexpr std::size_t kHop = kSegment / 2;
    const std::size_t n = a.values.size();
    if (n < kSegment)
        throw TooShort("coherence needs at least " + std::to_string(kSegment) +
                       " samples, got " + std::to_string(n));

    std::array<double, kSegment> window;
    for (std::size_t i = 0; i < kSegment; ++i)
        window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                         static_cast<double>(kSegment));

    constexpr std::size_t kBins = kSegment / 2 + 1;
    std::array<double, kBins> pxx{}, pyy{};
    std::array<std::complex<double>, kBins> pxy{};
    std::vector<std::complex<double>> fa(kSegment), fb(kSegment);

    const std::size_t segments = 1 + (n - kSegment) / kHop;
    for (std::size_t s = 0; s < segments; ++s) {
        const std::size_t off = s * kHop;
        for (std::size_t i = 0; i < kSegment; ++i) {
            fa[i] = a.values[off + i] * window[i];
            fb[i] = b.values[off + i] * window[i];
        }
        detail::fft_radix2(fa);
        detail::fft_radix2(fb);
        for (std::size_t k = 0; k < kBins; ++k) {
            pxx[k] += std::norm(fa[k]);
            pyy[k] += std::norm(fb[k]);
            pxy[k] += fa[k] * std::conj(fb[k]);
        }
    }

    double acc = 0.0;
    std::size_t used = 0;
    for (std::size_t k = 0; k < kBins; ++k) {
        const double f = static_cast<double>(k) * a.sample_rate / kSegment;
        if (f < band.lo_hz || f > band.hi_hz) continue;
        const double denom = pxx[k] * pyy[k];
        acc += denom > 0.0 ? std::norm(pxy[k]) / denom : 0.0;
        ++used;
    }
    if (used == 0) throw std::invalid_argument("band contains no frequency bins");
    return std::clamp(acc / static_cast<double>(used), 0.0, 1.0);
}

}  // namespace shakekey
