#include <doctest.h>

#include <numbers>

#include "featiso/spectral.hpp"
#include "support.hpp"

using namespace featiso;

namespace {

using cd = std::complex<double>;

// Textbook double sum, O(N^2) per bin.
ComplexPlane<double> dft_oracle(const Plane<double>& x) {
  const auto m = x.rows();
  const auto n = x.cols();
  ComplexPlane<double> out(m, n);
  for (Eigen::Index u = 0; u < m; ++u) {
    for (Eigen::Index v = 0; v < n; ++v) {
      cd acc = 0;
      for (Eigen::Index r = 0; r < m; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) {
          const double angle = -2.0 * std::numbers::pi * (double(u * r) / m + double(v * c) / n);
          acc += x(r, c) * cd(std::cos(angle), std::sin(angle));
        }
      }
      out(u, v) = acc;
    }
  }
  return out;
}

double rel_l2(const Planes<double>& a, const Planes<double>& b) {
  double num = 0, den = 0;
  for (int c = 0; c < 3; ++c) {
    num += (a[c] - b[c]).square().sum();
    den += b[c].square().sum();
  }
  return std::sqrt(num / den);
}

double wrap(double a) {
  a = std::fmod(a + std::numbers::pi, 2.0 * std::numbers::pi);
  if (a < 0) a += 2.0 * std::numbers::pi;
  return a - std::numbers::pi;
}

}  // namespace

TEST_CASE("dft2 agrees with the direct sum") {
  std::mt19937 gen(1);
  for (const auto& [rows, cols] : std::vector<std::pair<int, int>>{{8, 8}, {7, 9}, {11, 6}, {13, 13}}) {
    const Image img = testing::random_image(gen, rows, cols);
    const SpectralPlanes s = dft2(img);
    for (int ch = 0; ch < 3; ++ch) {
      const ComplexPlane<double> ref = dft_oracle(img.channel(ch));
      for (Eigen::Index i = 0; i < ref.size(); ++i) {
        const cd got = std::polar(s.amplitude[ch].data()[i], s.phase[ch].data()[i]);
        REQUIRE(std::abs(got - ref.data()[i]) < 1e-9 * (1.0 + std::abs(ref.data()[i])));
      }
    }
  }
}

TEST_CASE("dft2 closed forms") {
  SUBCASE("constant image is DC only") {
    const SpectralPlanes s = dft2(Image::filled(6, 10, Rgb(0.25, 0.5, 1.0)));
    for (int ch = 0; ch < 3; ++ch) {
      CHECK(s.amplitude[ch](0, 0) == doctest::Approx(std::array{0.25, 0.5, 1.0}[ch] * 60));
      Plane<double> rest = s.amplitude[ch];
      rest(0, 0) = 0;
      CHECK((rest == 0.0).all());
      CHECK((s.phase[ch] == 0.0).all());
    }
  }
  SUBCASE("unit impulse has flat amplitude and zero phase") {
    const Image impulse = testing::from_function(8, 8, [](auto r, auto c, int) { return r == 0 && c == 0 ? 1.0 : 0.0; });
    const SpectralPlanes s = dft2(impulse);
    for (int ch = 0; ch < 3; ++ch) {
      CHECK(((s.amplitude[ch] - 1.0).abs() < 1e-12).all());
      CHECK((s.phase[ch].abs() < 1e-12).all());
    }
  }
  SUBCASE("phase range is (-pi, pi]") {
    // Alternating columns put a real negative value at the Nyquist bin.
    const Image img = testing::from_function(4, 8, [](auto, auto c, int) { return c % 2 ? 1.0 : 0.0; });
    const SpectralPlanes s = dft2(img);
    CHECK(std::abs(s.phase[0](0, 4)) == doctest::Approx(std::numbers::pi));
    std::mt19937 gen(3);
    const SpectralPlanes r = dft2(testing::random_image(gen, 9, 12));
    for (int ch = 0; ch < 3; ++ch) {
      CHECK((r.phase[ch] > -std::numbers::pi).all());
      CHECK((r.phase[ch] <= std::numbers::pi).all());
      CHECK((r.amplitude[ch] >= 0.0).all());
    }
  }
}

TEST_CASE("round trip, Parseval and Hermitian symmetry on random sizes") {
  std::mt19937 gen(2024);
  std::uniform_int_distribution<int> side(8, 64);
  for (int trial = 0; trial < 100; ++trial) {
    const int rows = trial % 2 ? side(gen) | 1 : side(gen) & ~1;
    const int cols = side(gen);
    const Image img = testing::random_image(gen, rows, cols);
    const SpectralPlanes s = dft2(img);
    const InverseResult back = idft2(s);
    REQUIRE(rel_l2(back.real, img.planes()) < 1e-9);

    const double n = static_cast<double>(rows) * cols;
    for (int ch = 0; ch < 3; ++ch) {
      const double spatial = img.channel(ch).square().sum();
      REQUIRE(std::abs(spatial - s.amplitude[ch].square().sum() / n) < 1e-9 * spatial);
      for (int u = 0; u < rows; ++u) {
        for (int v = 0; v < cols; ++v) {
          const int mu = (rows - u) % rows;
          const int mv = (cols - v) % cols;
          REQUIRE(std::abs(s.amplitude[ch](u, v) - s.amplitude[ch](mu, mv)) < 1e-9 * (1 + s.amplitude[ch](u, v)));
          if (s.amplitude[ch](u, v) > 1e-9) {
            REQUIRE(std::abs(wrap(s.phase[ch](u, v) + s.phase[ch](mu, mv))) < 1e-9);
          }
        }
      }
    }
  }
}

TEST_CASE("idft2 closed forms") {
  SUBCASE("DC-only planes invert to a constant") {
    SpectralPlanes s;
    s.rows = 5;
    s.cols = 7;
    for (int ch = 0; ch < 3; ++ch) {
      s.amplitude[ch] = Plane<double>::Zero(5, 7);
      s.phase[ch] = Plane<double>::Zero(5, 7);
      s.amplitude[ch](0, 0) = 0.4 * 35;
    }
    const InverseResult r = idft2(s);
    for (int ch = 0; ch < 3; ++ch) CHECK(((r.real[ch] - 0.4).abs() < 1e-12).all());
  }
  SUBCASE("Hermitian-symmetric random planes invert to a real array") {
    std::mt19937 gen(6);
    std::uniform_real_distribution<double> u(0.0, 2.0), ang(-std::numbers::pi, std::numbers::pi);
    for (const auto& [rows, cols] : std::vector<std::pair<int, int>>{{8, 8}, {9, 7}, {10, 15}}) {
      SpectralPlanes s;
      s.rows = rows;
      s.cols = cols;
      for (int ch = 0; ch < 3; ++ch) {
        s.amplitude[ch].resize(rows, cols);
        s.phase[ch].resize(rows, cols);
        for (int a = 0; a < rows; ++a) {
          for (int b = 0; b < cols; ++b) {
            const int ma = (rows - a) % rows;
            const int mb = (cols - b) % cols;
            if (std::make_pair(ma, mb) < std::make_pair(a, b)) {
              s.amplitude[ch](a, b) = s.amplitude[ch](ma, mb);
              s.phase[ch](a, b) = -s.phase[ch](ma, mb);
            } else if (ma == a && mb == b) {
              s.amplitude[ch](a, b) = u(gen);
              s.phase[ch](a, b) = u(gen) < 1.0 ? 0.0 : std::numbers::pi;
            } else {
              s.amplitude[ch](a, b) = u(gen);
              s.phase[ch](a, b) = ang(gen);
            }
          }
        }
      }
      CHECK(idft2(s).max_imag < 1e-6);
    }
  }
}

TEST_CASE("recombine") {
  std::mt19937 gen(7);
  SUBCASE("self recombination is the identity") {
    for (const int side : {8, 9, 16, 21}) {
      const Image x = testing::random_image(gen, side, side + 3);
      const SpectralPlanes s = dft2(x);
      CHECK(rel_l2(recombine_raw(s, s).real, x.planes()) < 1e-6);
      const Image y = recombine(s, s);
      for (int ch = 0; ch < 3; ++ch) CHECK((y.channel(ch) - x.channel(ch)).abs().maxCoeff() < 1e-6);
    }
  }
  SUBCASE("two real images recombine to a real array") {
    for (const auto& [rows, cols] : std::vector<std::pair<int, int>>{{8, 8}, {9, 11}, {16, 13}, {31, 32}}) {
      const Image a = testing::random_image(gen, rows, cols);
      const Image b = testing::random_image(gen, rows, cols);
      CHECK(recombine_raw(dft2(a), dft2(b)).max_imag < 1e-6);
    }
  }
  SUBCASE("swap then swap back on the unclamped path") {
    const Image a = testing::random_image(gen, 12, 10);
    const Image b = testing::random_image(gen, 12, 10);
    const SpectralPlanes sa = dft2(a);
    const SpectralPlanes sb = dft2(b);
    const InverseResult mixed = recombine_raw(sa, sb);
    // Re-decomposing the unclamped mix recovers A_a and P_b.
    const SpectralPlanes sm = dft2<double>(mixed.real);
    const InverseResult again = recombine_raw(sa, sm);
    CHECK(rel_l2(again.real, mixed.real) < 1e-9);
    for (int ch = 0; ch < 3; ++ch) CHECK(((sm.amplitude[ch] - sa.amplitude[ch]).abs() < 1e-9).all());
  }
  SUBCASE("size mismatch") {
    CHECK_THROWS_AS(recombine(dft2(testing::random_image(gen, 8, 8)), dft2(testing::random_image(gen, 8, 9))),
                    DataError);
  }
}

TEST_CASE("phase_randomize (amplitude only)") {
  std::mt19937 gen(8);
  SUBCASE("constant image: both DC branches of a raw noise phase") {
    const Image c = Image::filled(9, 8, Rgb(0.3, 0.6, 0.9));
    int positive = 0, negative = 0;
    for (std::uint64_t s = 0; s < 40; ++s) {
      RngStream rng(s, "const", "phase");
      const Planes<double> noise = gaussian_noise(9, 8, rng);
      const InverseResult raw = recombine_raw(dft2(c), dft2<double>(noise));
      for (int ch = 0; ch < 3; ++ch) {
        const double sign = noise[ch].sum() > 0 ? 1.0 : -1.0;
        (sign > 0 ? positive : negative)++;
        CHECK(((raw.real[ch] - sign * c.channel(ch)).abs() < 1e-9).all());
      }
      // The shipped transform keeps the source's DC phase, so it lands on the + branch.
      RngStream again(s, "const", "phase");
      const InverseResult kept = phase_randomize_raw(c, again);
      CHECK(rel_l2(kept.real, c.planes()) < 1e-3);
    }
    CHECK(positive > 0);
    CHECK(negative > 0);
  }
  SUBCASE("amplitude and energy are preserved before clamping") {
    for (const auto& [rows, cols] : std::vector<std::pair<int, int>>{{8, 8}, {9, 13}, {24, 17}}) {
      const Image x = testing::random_image(gen, rows, cols);
      RngStream rng(3, "amp", "phase");
      const InverseResult raw = phase_randomize_raw(x, rng);
      CHECK(raw.max_imag < 1e-6);
      const SpectralPlanes before = dft2(x);
      const SpectralPlanes after = dft2<double>(raw.real);
      for (int ch = 0; ch < 3; ++ch) {
        CHECK(((after.amplitude[ch] - before.amplitude[ch]).abs() < 1e-6).all());
        CHECK(raw.real[ch].square().sum() == doctest::Approx(x.channel(ch).square().sum()).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("amplitude_randomize (phase only)") {
  std::mt19937 gen(9);
  SUBCASE("phase survives at non-degenerate bins") {
    const Image x = testing::random_image(gen, 14, 11);
    RngStream rng(5, "p", "amp");
    const InverseResult raw = amplitude_randomize_raw(x, rng);
    CHECK(raw.max_imag < 1e-6);
    const SpectralPlanes before = dft2(x);
    const SpectralPlanes after = dft2<double>(raw.real);
    for (int ch = 0; ch < 3; ++ch) {
      const double floor = 1e-6 * after.amplitude[ch].maxCoeff();
      for (Eigen::Index i = 0; i < after.amplitude[ch].size(); ++i) {
        if (after.amplitude[ch].data()[i] < floor || before.amplitude[ch].data()[i] < 1e-9) continue;
        REQUIRE(std::abs(wrap(after.phase[ch].data()[i] - before.phase[ch].data()[i])) < 1e-6);
      }
    }
  }
  SUBCASE("different streams give different images with the same phase") {
    const Image x = testing::random_image(gen, 16, 16);
    RngStream a(1, "x", "amp"), b(2, "x", "amp");
    const Image ya = amplitude_randomize(x, a);
    const Image yb = amplitude_randomize(x, b);
    double diff = 0;
    for (int ch = 0; ch < 3; ++ch) diff += (ya.channel(ch) - yb.channel(ch)).square().sum();
    CHECK(diff > 0.0);
    for (int ch = 0; ch < 3; ++ch) {
      CHECK(ya.channel(ch).minCoeff() == 0.0);
      CHECK(ya.channel(ch).maxCoeff() == 1.0);
    }
  }
  SUBCASE("impulse: inverse of the noise amplitude with zero phase") {
    const Image impulse = testing::from_function(8, 10, [](auto r, auto c, int) { return r == 0 && c == 0 ? 1.0 : 0.0; });
    RngStream rng(11, "imp", "amp"), replay(11, "imp", "amp");
    const InverseResult raw = amplitude_randomize_raw(impulse, rng);
    const Planes<double> noise = gaussian_noise(8, 10, replay);
    for (int ch = 0; ch < 3; ++ch) {
      const ComplexPlane<double> ns = dft_oracle(noise[ch]);
      for (Eigen::Index r = 0; r < 8; ++r) {
        for (Eigen::Index c = 0; c < 10; ++c) {
          // Inverse DFT of |N| by direct summation.
          double acc = 0;
          for (Eigen::Index u = 0; u < 8; ++u) {
            for (Eigen::Index v = 0; v < 10; ++v) {
              acc += std::abs(ns(u, v)) * std::cos(2.0 * std::numbers::pi * (double(u * r) / 8 + double(v * c) / 10));
            }
          }
          REQUIRE(raw.real[ch](r, c) == doctest::Approx(acc / 80).epsilon(1e-9));
        }
      }
    }
  }
}

TEST_CASE("apr_augment") {
  std::mt19937 gen(10);
  const Image xj = testing::random_image(gen, 15, 12);
  const Image xk = testing::random_image(gen, 15, 12);

  SUBCASE("self pairing is the identity for every variant") {
    for (const auto v : {AprVariant::kAprP, AprVariant::kAfAprP, AprVariant::kMixAprP}) {
      RngStream rng(1, "self", "apr");
      const RecombinedSample s = apr_augment(v, xj, xj, rng);
      CHECK(rel_l2(s.unclamped, xj.planes()) < 1e-6);
    }
  }
  SUBCASE("amplitude donor spectrum is preserved") {
    RngStream r1(1, "a", "apr"), r2(1, "a", "apr");
    const RecombinedSample p = apr_augment(AprVariant::kAprP, xj, xk, r1);
    CHECK(p.label_source == LabelSource::kPhaseDonor);
    CHECK(p.max_imag < 1e-6);
    const SpectralPlanes donor_k = dft2(xk);
    const SpectralPlanes got_p = dft2<double>(p.unclamped);
    const RecombinedSample f = apr_augment(AprVariant::kAfAprP, xj, xk, r2);
    CHECK(f.label_source == LabelSource::kAmplitudeDonor);
    const SpectralPlanes donor_j = dft2(xj);
    const SpectralPlanes got_f = dft2<double>(f.unclamped);
    for (int ch = 0; ch < 3; ++ch) {
      const double scale = donor_k.amplitude[ch].maxCoeff();
      CHECK((got_p.amplitude[ch] - donor_k.amplitude[ch]).abs().maxCoeff() < 1e-6 * scale);
      CHECK((got_f.amplitude[ch] - donor_j.amplitude[ch]).abs().maxCoeff() < 1e-6 * scale);
    }
  }
  SUBCASE("mix variant flips a fair coin") {
    const Image a = testing::random_image(gen, 8, 8);
    const Image b = testing::random_image(gen, 8, 8);
    RngStream rng(2024, "mix", "apr");
    int phase = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      phase += apr_augment(AprVariant::kMixAprP, a, b, rng).label_source == LabelSource::kPhaseDonor;
    }
    CHECK(phase >= 4800);
    CHECK(phase <= 5200);
  }
  SUBCASE("names") {
    CHECK(parse_apr_variant("af_apr_p") == AprVariant::kAfAprP);
    CHECK_FALSE(parse_apr_variant("apr").has_value());
    CHECK(to_string(LabelSource::kAmplitudeDonor) == "amplitude_donor");
  }
}

TEST_CASE("export_spectrum") {
  SUBCASE("constant image lights only the centre") {
    const Image out = export_spectrum(Image::filled(16, 12, Rgb(0.5, 0.2, 0.9)));
    for (Eigen::Index r = 0; r < 16; ++r) {
      for (Eigen::Index c = 0; c < 12; ++c) {
        CHECK(out.at(r, c, 0) == ((r == 8 && c == 6) ? 1.0 : 0.0));
      }
    }
  }
  SUBCASE("non-constant input spans [0, 1]") {
    std::mt19937 gen(12);
    const Image out = export_spectrum(testing::random_image(gen, 13, 9));
    CHECK(out.channel(1).minCoeff() == 0.0);
    CHECK(out.channel(1).maxCoeff() == 1.0);
  }
  SUBCASE("horizontal cosine gives a symmetric off-centre pair") {
    const int f = 3;
    const Image wave = testing::from_function(16, 16, [&](auto, auto c, int) {
      return 0.5 + 0.5 * std::cos(2.0 * std::numbers::pi * f * static_cast<double>(c) / 16.0);
    });
    const Image out = export_spectrum(wave);
    // The oracle: DFT bins (0, +-f) carry N/4 each, DC carries N/2, the rest 0.
    std::vector<std::pair<Eigen::Index, Eigen::Index>> bright;
    for (Eigen::Index r = 0; r < 16; ++r) {
      for (Eigen::Index c = 0; c < 16; ++c) {
        if (out.at(r, c, 0) > 0.5 && !(r == 8 && c == 8)) bright.emplace_back(r, c);
      }
    }
    CHECK(bright == std::vector<std::pair<Eigen::Index, Eigen::Index>>{{8, 8 - f}, {8, 8 + f}});
    CHECK(out.at(8, 8 - f, 0) == doctest::Approx(std::log1p(64.0) / std::log1p(128.0)));
  }
}
