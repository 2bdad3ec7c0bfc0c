#pragma once

#include <vector>

#include "virolbi/lattice.hpp"

namespace virolbi::spectral {

struct BandSplit {
    ImagePlane low;
    ImagePlane high;
};

// Splits x into low- and high-frequency components by a radial cut in
// centered integer frequency coordinates: frequencies at Euclidean distance
// <= r stay in the low band (ties go low), the rest in the high band, so
// low + high == x exactly up to FFT round-off. Throws on r <= 0.
BandSplit decompose(const ImagePlane& x, double r);

// E(F(X) - F(X_hat)) reduced to a raster: the complex Fourier differences
// are averaged over pairs first, then the magnitude is taken. The output is
// fftshift-centered (DC at (h/2, w/2)). Lists must be nonempty, aligned and
// of identical dimensions.
ImagePlane expected_spectral_diff(const std::vector<ImagePlane>& originals,
                                  const std::vector<ImagePlane>& smoothed);

struct BandEnergy {
    double low = 0.0;
    double high = 0.0;
};

// Squared-l2 energy of the two bands of decompose(x, r), measured in the
// spatial domain (Parseval makes this match the spectral split).
BandEnergy band_energy(const ImagePlane& x, double r);

// Band split of a centered magnitude raster (as produced by
// expected_spectral_diff): sums of squared magnitudes inside/outside
// radius r around the raster center.
BandEnergy spectrum_band_energy(const ImagePlane& centered_magnitude, double r);

}  // namespace virolbi::spectral
