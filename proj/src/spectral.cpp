#include "featiso/spectral.hpp"

#include <array>
#include <string>

namespace featiso {

namespace {

void require_same_size(const SpectralPlanes& a, const SpectralPlanes& b) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw DataError("spectral planes differ in size: " + std::to_string(a.rows) + "x" +
                    std::to_string(a.cols) + " vs " + std::to_string(b.rows) + "x" +
                    std::to_string(b.cols));
  }
}

SpectralPlanes mix_planes(const SpectralPlanes& amplitude_src, const SpectralPlanes& phase_src) {
  require_same_size(amplitude_src, phase_src);
  SpectralPlanes mixed;
  mixed.rows = amplitude_src.rows;
  mixed.cols = amplitude_src.cols;
  mixed.amplitude = amplitude_src.amplitude;
  mixed.phase = phase_src.phase;
  return mixed;
}

}  // namespace

InverseResult recombine_raw(const SpectralPlanes& amplitude_src, const SpectralPlanes& phase_src) {
  return idft2(mix_planes(amplitude_src, phase_src));
}

Image recombine(const SpectralPlanes& amplitude_src, const SpectralPlanes& phase_src) {
  return Image::clamped(recombine_raw(amplitude_src, phase_src).real);
}

Planes<double> gaussian_noise(Eigen::Index rows, Eigen::Index cols, RngStream& rng) {
  Planes<double> noise;
  for (auto& p : noise) {
    p.resize(rows, cols);
    for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = rng.normal();
  }
  return noise;
}

InverseResult phase_randomize_raw(const Image& img, RngStream& rng) {
  const SpectralPlanes source = dft2(img);
  SpectralPlanes noise = dft2<double>(gaussian_noise(img.rows(), img.cols(), rng));
  for (int c = 0; c < 3; ++c) noise.phase[c](0, 0) = source.phase[c](0, 0);
  return recombine_raw(source, noise);
}

Image phase_randomize(const Image& img, RngStream& rng) {
  return Image::clamped(phase_randomize_raw(img, rng).real);
}

InverseResult amplitude_randomize_raw(const Image& img, RngStream& rng) {
  const SpectralPlanes source = dft2(img);
  const SpectralPlanes noise = dft2<double>(gaussian_noise(img.rows(), img.cols(), rng));
  return recombine_raw(noise, source);
}

Image amplitude_randomize(const Image& img, RngStream& rng) {
  Planes<double> raw = amplitude_randomize_raw(img, rng).real;
  for (auto& p : raw) {
    const double lo = p.minCoeff();
    const double range = p.maxCoeff() - lo;
    if (range > 1e-12) {
      p = (p - lo) / range;
    } else {
      p.setZero();
    }
  }
  return Image::clamped(std::move(raw));
}

std::string_view to_string(AprVariant v) {
  switch (v) {
    case AprVariant::kAprP:
      return "apr_p";
    case AprVariant::kAfAprP:
      return "af_apr_p";
    case AprVariant::kMixAprP:
      return "mix_apr_p";
  }
  return "unknown";
}

std::string_view to_string(LabelSource s) {
  return s == LabelSource::kPhaseDonor ? "phase_donor" : "amplitude_donor";
}

std::optional<AprVariant> parse_apr_variant(std::string_view name) {
  for (const auto v : {AprVariant::kAprP, AprVariant::kAfAprP, AprVariant::kMixAprP}) {
    if (name == to_string(v)) return v;
  }
  return std::nullopt;
}

RecombinedSample apr_augment(AprVariant variant, const Image& x_j, const Image& x_k, RngStream& rng) {
  if (x_j.rows() != x_k.rows() || x_j.cols() != x_k.cols()) {
    throw DataError("APR partners differ in size");
  }
  LabelSource source = LabelSource::kPhaseDonor;
  switch (variant) {
    case AprVariant::kAprP:
      source = LabelSource::kPhaseDonor;
      break;
    case AprVariant::kAfAprP:
      source = LabelSource::kAmplitudeDonor;
      break;
    case AprVariant::kMixAprP:
      source = rng.coin() ? LabelSource::kPhaseDonor : LabelSource::kAmplitudeDonor;
      break;
  }
  const SpectralPlanes own = dft2(x_j);
  const SpectralPlanes partner = dft2(x_k);
  InverseResult raw = source == LabelSource::kPhaseDonor ? recombine_raw(partner, own)
                                                         : recombine_raw(own, partner);
  RecombinedSample out{Image::clamped(raw.real), source, std::move(raw.real), raw.max_imag};
  return out;
}

Image export_spectrum(const Image& img) {
  const SpectralPlanes spec = dft2(img);
  const Plane<double> magnitude =
      ((spec.amplitude[0] + spec.amplitude[1] + spec.amplitude[2]) / 3.0).log1p();
  const auto rows = spec.rows;
  const auto cols = spec.cols;
  Plane<double> shifted(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      shifted((r + rows / 2) % rows, (c + cols / 2) % cols) = magnitude(r, c);
    }
  }
  const double lo = shifted.minCoeff();
  const double range = shifted.maxCoeff() - lo;
  if (range > 0.0) {
    shifted = (shifted - lo) / range;
  } else {
    shifted.setZero();
  }
  return Image::clamped({shifted, shifted, shifted});
}

}  // namespace featiso
