#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "notchset/correlation.hpp"

using namespace notchset;

namespace {

cvec random_cm(int n, std::uint64_t seed) {
    const auto s = random_phase_set(1, n, PhaseAlphabet::continuous(), {seed, 0});
    return cvec(s.row(0), s.row(0) + n);
}

double max_diff(const CorrelationProfile& a, const CorrelationProfile& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

}  // namespace

TEST_CASE("tiny aperiodic hand case") {
    const cvec x = {1.0, 1.0};
    const auto r = xcorr(x, x);
    REQUIRE(r.values.size() == 3);
    CHECK(r.at_lag(-1) == cplx(1, 0));
    CHECK(r.at_lag(0) == cplx(2, 0));
    CHECK(r.at_lag(1) == cplx(1, 0));
    CHECK(r.min_lag() == -1);
    CHECK(r.max_lag() == 1);
}

TEST_CASE("orthogonal pair cancels at lag zero") {
    const cvec x = {1.0, cplx(0, 1)};
    const cvec y = {1.0, cplx(0, -1)};
    const auto r = xcorr(x, y);
    CHECK(std::abs(r.at_lag(0)) < 1e-15);
    CHECK(r.at_lag(1) == cplx(0, 1));   // x_0 y*_1
    CHECK(r.at_lag(-1) == cplx(0, 1));  // x_1 y*_0
}

TEST_CASE("autocorrelation mainlobe and conjugate symmetry") {
    const int n = 37;
    const cvec x = random_cm(n, 5);
    const auto r = xcorr(x, x);
    CHECK(std::abs(r.at_lag(0) - cplx(n, 0)) < 1e-12);
    for (int l = 1; l < n; ++l)
        CHECK(std::abs(r.at_lag(-l) - std::conj(r.at_lag(l))) < 1e-10);
}

TEST_CASE("fft path matches direct on both kinds") {
    for (int n : {8, 33, 100}) {
        const cvec x = random_cm(n, 7);
        const cvec y = random_cm(n, 8);
        CHECK(max_diff(xcorr(x, y), xcorr_fft(x, y)) < 1e-8);
        CHECK(max_diff(xcorr(x, y, CorrKind::Periodic),
                       xcorr_fft(x, y, CorrKind::Periodic)) < 1e-8);
    }
}

TEST_CASE("periodic profile is N-periodic") {
    const int n = 16;
    const cvec x = random_cm(n, 3);
    const cvec y = random_cm(n, 4);
    const auto r = xcorr(x, y, CorrKind::Periodic);
    for (int l = 1; l < n; ++l)
        CHECK(std::abs(r.at_lag(l - n) - r.at_lag(l)) < 1e-10);
}

TEST_CASE("xcorr input validation") {
    CHECK_THROWS_AS(xcorr({}, {}), ParamError);
    CHECK_THROWS_AS(xcorr({1.0}, {1.0, 1.0}), ParamError);
}

TEST_CASE("single sequence has zero cross level") {
    const auto set = random_phase_set(1, 32, PhaseAlphabet::continuous(), {6, 0});
    const auto r = iccl(set);
    CHECK(r.raw == 0.0);
    CHECK(r.scaled == 0.0);
}

TEST_CASE("all-ones pair cross level by hand") {
    // M=2, N=2: r_{01}(l) = {1,2,1}, energy 6, ordered pairs (0,1),(1,0) -> 12
    SequenceSet set(2, 2, PhaseAlphabet::continuous());
    const auto r = iccl(set);
    CHECK(r.raw == doctest::Approx(12.0).epsilon(1e-12));
    CHECK(r.scaled == doctest::Approx(12.0 / 64.0).epsilon(1e-12));  // (2MN)^2 = 64
}

TEST_CASE("random-phase cross energy concentrates near its mean") {
    // E sum_l |r(l)|^2 = N^2 per ordered pair for iid uniform phases; with
    // M=3 there are 6 ordered pairs -> mean 6 N^2 = 24576 at N=64.
    const int n = 64;
    double acc = 0.0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        const auto set =
            random_phase_set(3, n, PhaseAlphabet::continuous(), {static_cast<std::uint64_t>(t + 1), 0});
        acc += iccl(set).raw;
    }
    acc /= trials;
    CHECK(acc > 0.8 * 6.0 * n * n);
    CHECK(acc < 1.2 * 6.0 * n * n);
}

TEST_CASE("isl bound values") {
    CHECK(isl_bound(4, 64) == doctest::Approx(64.0 * 64.0 * 4.0 * 3.0));  // 49152
    CHECK(isl_bound(1, 100) == 0.0);
    CHECK(isl_bound_db(3) == doctest::Approx(10.0 * std::log10(2.0)).epsilon(1e-12));
}

TEST_CASE("isl dominates the cross term") {
    const auto set = random_phase_set(3, 48, PhaseAlphabet::discrete(4), {12, 0});
    const double cross = iccl(set).raw;
    const double total = isl(set);
    CHECK(total >= cross);
    CHECK(cross >= 0.0);
}

TEST_CASE("summary ties the pieces together") {
    const auto set = random_phase_set(2, 32, PhaseAlphabet::continuous(), {19, 0});
    const auto s = correlation_summary(set);
    CHECK(s.iccl_raw == doctest::Approx(iccl(set).raw));
    CHECK(s.isl == doctest::Approx(isl(set)));
    CHECK(s.islr_db == doctest::Approx(islr_db(set)));
    CHECK(s.bound_db == doctest::Approx(isl_bound_db(2)));
    CHECK(s.islr_db ==
          doctest::Approx(db10(s.isl / (2.0 * 32.0 * 32.0))).epsilon(1e-12));
}

TEST_CASE("cross level is invariant to a global phase on one row") {
    auto set = random_phase_set(2, 24, PhaseAlphabet::continuous(), {31, 0});
    const double before = iccl(set).raw;
    for (int i = 0; i < 24; ++i)
        set.set_phase(1, i, wrap_phase(set.phase_of(1, i) + 0.777));
    CHECK(iccl(set).raw == doctest::Approx(before).epsilon(1e-9));
}

TEST_CASE("peak cross correlation of identical rows is 0 dB") {
    SequenceSet set(2, 16, PhaseAlphabet::continuous());
    const auto other = random_phase_set(1, 16, PhaseAlphabet::continuous(), {40, 0});
    for (int i = 0; i < 16; ++i) {
        set.set_entry_unit(0, i, other.at(0, i));
        set.set_entry_unit(1, i, other.at(0, i));
    }
    CHECK(peak_cross_correlation_db(set) == doctest::Approx(0.0).epsilon(1e-9));

    const auto rnd = random_phase_set(2, 256, PhaseAlphabet::continuous(), {41, 0});
    CHECK(peak_cross_correlation_db(rnd) < -5.0);  // random pairs sit well below 0 dB
}
