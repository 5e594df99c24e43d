#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "shakekey/errors.hpp"
#include "shakekey/trace.hpp"

namespace shakekey {

/// 1-D dominant-motion signal: the trace window projected onto its first
/// principal axis. Two devices rigidly coupled through a handshake recover
/// nearly the same series regardless of how each is strapped to the wrist.
struct FeatureSeries {
    double sample_rate = 200.0;
    std::vector<double> values;
    bool sign_convention_applied = false;
};

/// Per-axis temporally centered window plus the removed means.
struct CenteredWindow {
    std::array<std::vector<double>, 3> rows;
    std::array<double, 3> means{};

    std::size_t cols() const noexcept { return rows[0].size(); }
};

/// Eigendecomposition of the 3x3 acceleration scatter matrix.
/// eigenvectors[k] is the unit eigenvector paired with eigenvalues[k];
/// eigenvalues are sorted descending by absolute value and clamped to >= 0.
/// For an all-zero window the vectors default to the coordinate axes and
/// `degenerate` is set.
struct PcaDecomposition {
    std::array<double, 3> eigenvalues{};
    std::array<std::array<double, 3>, 3> eigenvectors{};
    std::array<double, 3> per_axis_means{};
    bool degenerate = false;
};

/// Subtracts each axis's temporal mean. Requires at least 2 samples.
CenteredWindow center(const MotionTrace& window);

/// Diagonalizes the unnormalized scatter matrix C = Xc * Xc^T with a cyclic
/// Jacobi sweep; deterministic for identical inputs.
PcaDecomposition principal_axes(const CenteredWindow& centered);
PcaDecomposition principal_axes(const MotionTrace& window);

/// Projects the window onto its first principal axis and applies the sign
/// convention: the sample with the largest absolute value is made positive
/// (ties broken by earliest index). The convention is frame-invariant, so
/// both ends of a handshake settle on the same orientation without
/// exchanging anything. Throws DegenerateInput for constant windows.
FeatureSeries project_first_pc(const MotionTrace& window);

struct FrequencyBand {
    double lo_hz = 0.0;
    double hi_hz = 10.0;
};

/// Mean magnitude-squared coherence over the band, estimated from averaged
/// periodograms: 64-sample segments, 50% overlap, cosine (Hann) taper,
/// no per-segment detrend. Requires equal lengths and rates, and at least
/// one full segment.
double coherence(const FeatureSeries& a, const FeatureSeries& b, FrequencyBand band = {});

}  // namespace shakekey
