#pragma once

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string_view>
#include <vector>

#include "featiso/image.hpp"
#include "featiso/rng.hpp"

namespace featiso {

template <typename Scalar>
using ComplexPlane = Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-channel amplitude and phase of an unnormalized 2-D DFT.
/// Amplitude is non-negative; phase lies in (-pi, pi]; bins whose modulus is
/// numerically zero carry phase 0.
template <typename Scalar>
struct BasicSpectralPlanes {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  Planes<Scalar> amplitude;
  Planes<Scalar> phase;
};

using SpectralPlanes = BasicSpectralPlanes<double>;

/// Moduli at or below this fraction of a channel's largest modulus count as zero.
inline constexpr double kZeroModulus = 1e-13;

/// In-place-free 2-D FFT (rows, then columns). Forward is unnormalized; inverse
/// divides by rows * cols. Any lengths are supported.
template <typename Scalar>
ComplexPlane<Scalar> fft2(const ComplexPlane<Scalar>& x, bool inverse) {
  Eigen::FFT<Scalar> fft;
  const auto rows = x.rows();
  const auto cols = x.cols();
  ComplexPlane<Scalar> out(rows, cols);
  std::vector<std::complex<Scalar>> in_buf, out_buf;

  in_buf.resize(static_cast<std::size_t>(cols));
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) in_buf[c] = x(r, c);
    inverse ? fft.inv(out_buf, in_buf) : fft.fwd(out_buf, in_buf);
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = out_buf[c];
  }
  in_buf.resize(static_cast<std::size_t>(rows));
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) in_buf[r] = out(r, c);
    inverse ? fft.inv(out_buf, in_buf) : fft.fwd(out_buf, in_buf);
    for (Eigen::Index r = 0; r < rows; ++r) out(r, c) = out_buf[r];
  }
  return out;
}

template <typename Scalar>
BasicSpectralPlanes<Scalar> dft2(const Planes<Scalar>& x) {
  BasicSpectralPlanes<Scalar> out;
  out.rows = x[0].rows();
  out.cols = x[0].cols();
  for (int ch = 0; ch < 3; ++ch) {
    const ComplexPlane<Scalar> spectrum = fft2<Scalar>(x[ch].template cast<std::complex<Scalar>>(), false);
    const Plane<Scalar> modulus = spectrum.abs();
    const Scalar zero = Scalar(kZeroModulus) * modulus.maxCoeff();
    out.amplitude[ch].resize(out.rows, out.cols);
    out.phase[ch].resize(out.rows, out.cols);
    for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
      const Scalar m = modulus.data()[i];
      Scalar p = 0;
      if (m > zero) {
        p = std::arg(spectrum.data()[i]);
        if (p <= -std::numbers::pi_v<Scalar>) p = std::numbers::pi_v<Scalar>;
      }
      out.amplitude[ch].data()[i] = m > zero ? m : Scalar(0);
      out.phase[ch].data()[i] = p;
    }
  }
  return out;
}

inline SpectralPlanes dft2(const Image& img) { return dft2<double>(img.planes()); }

/// Real part of an inverse transform plus the largest discarded imaginary part.
struct InverseResult {
  Planes<double> real;
  double max_imag = 0.0;
};

template <typename Scalar>
InverseResult idft2(const BasicSpectralPlanes<Scalar>& planes) {
  InverseResult out;
  for (int ch = 0; ch < 3; ++ch) {
    ComplexPlane<Scalar> spectrum(planes.rows, planes.cols);
    for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
      spectrum.data()[i] = std::polar(planes.amplitude[ch].data()[i], planes.phase[ch].data()[i]);
    }
    const ComplexPlane<Scalar> spatial = fft2<Scalar>(spectrum, true);
    out.real[ch] = spatial.real().template cast<double>();
    out.max_imag = std::max(out.max_imag, static_cast<double>(spatial.imag().abs().maxCoeff()));
  }
  return out;
}

/// Amplitude of `amplitude_src` combined with phase of `phase_src`, inverted,
/// before clamping. Throws DataError on size mismatch.
InverseResult recombine_raw(const SpectralPlanes& amplitude_src, const SpectralPlanes& phase_src);

/// recombine_raw clamped into an Image.
Image recombine(const SpectralPlanes& amplitude_src, const SpectralPlanes& phase_src);

/// I.i.d. standard normal planes.
Planes<double> gaussian_noise(Eigen::Index rows, Eigen::Index cols, RngStream& rng);

/// "Amplitude-Only": the image's amplitude with a Gaussian-noise image's phase.
/// The zero-frequency bin keeps the image's own phase so the mean colour keeps
/// its sign. Returned before clamping.
InverseResult phase_randomize_raw(const Image& img, RngStream& rng);
Image phase_randomize(const Image& img, RngStream& rng);

/// "Phase-Only": the image's phase with a Gaussian-noise image's amplitude.
/// Returned before normalization.
InverseResult amplitude_randomize_raw(const Image& img, RngStream& rng);
/// Per-channel min-max normalization of amplitude_randomize_raw. Flat channels map to 0.
Image amplitude_randomize(const Image& img, RngStream& rng);

enum class AprVariant { kAprP, kAfAprP, kMixAprP };
enum class LabelSource { kPhaseDonor, kAmplitudeDonor };

std::string_view to_string(AprVariant v);
std::string_view to_string(LabelSource s);
std::optional<AprVariant> parse_apr_variant(std::string_view name);

/// Result of an amplitude-phase recombination of x_j with partner x_k.
/// x_j always supplies the labeled component, so the sample keeps x_j's label;
/// `label_source` says which spectral component that was.
struct RecombinedSample {
  Image image;
  LabelSource label_source = LabelSource::kPhaseDonor;
  Planes<double> unclamped;
  double max_imag = 0.0;
};

/// AprP: amplitude of x_k, phase of x_j (label follows phase).
/// AfAprP: amplitude of x_j, phase of x_k (label follows amplitude).
/// MixAprP: fair coin from `rng` picks one of the two.
RecombinedSample apr_augment(AprVariant variant, const Image& x_j, const Image& x_k, RngStream& rng);

/// Centre-shifted log(1 + mean channel amplitude), min-max normalized and
/// replicated to RGB. A flat spectrum maps to all zeros.
Image export_spectrum(const Image& img);

}  // namespace featiso
