#include <doctest.h>

#include <cmath>
#include <random>

#include "photon_lattice/disorder.hpp"

using namespace photon_lattice;

namespace {

ChainParams chain(double u, double p) {
    ChainParams c;
    c.n_sites = 1;
    c.nonlinearity = u;
    c.drive_amplitude = p;
    return c;
}

EnsembleConfig quick(int realizations, IcMode mode = IcMode::Random) {
    EnsembleConfig e;
    e.n_realizations = realizations;
    e.master_seed = 17;
    e.ic_mode = mode;
    e.transient_time = 200.0;
    e.window_time = 50.0;
    return e;
}

}  // namespace

TEST_CASE("zero width gives no disorder") {
    for (double x : sample_disorder(0.0, 1, 2, 10)) CHECK(x == 0.0);
}

TEST_CASE("disorder is uniform on [-W, W]") {
    double sum = 0.0, sum_sq = 0.0, lo = 1.0, hi = -1.0;
    const int configs = 1000, sites = 1000;
    for (int c = 0; c < configs; ++c) {
        for (double x : sample_disorder(1.0, 77, static_cast<std::uint64_t>(c), sites)) {
            sum += x;
            sum_sq += x * x;
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    }
    const double n = static_cast<double>(configs) * sites;
    const double mean = sum / n;
    CHECK(std::abs(mean) < 0.005);
    CHECK((sum_sq / n - mean * mean) == doctest::Approx(1.0 / 3.0).epsilon(0.01));
    CHECK(lo >= -1.0);
    CHECK(hi <= 1.0);
}

TEST_CASE("disorder vectors are reproducible and nested") {
    const auto a = sample_disorder(2.0, 5, 7, 20);
    const auto b = sample_disorder(2.0, 5, 7, 20);
    const auto other = sample_disorder(2.0, 5, 8, 20);
    const auto longer = sample_disorder(2.0, 5, 7, 30);
    CHECK(a == b);
    CHECK(a != other);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(longer[i] == a[i]);
}

TEST_CASE("zero width reduces exactly to the clean sweep") {
    const ChainParams c = chain(1.0, 5.0);
    const EnsembleConfig ens = quick(2);
    DisorderConfig dis;
    dis.width = 0.0;
    dis.n_configs = 16;
    const auto dirty = disordered_sweep(c, {4, 8}, dis, ens, IntegratorConfig{});
    const auto clean = length_sweep(c, {4, 8}, ens, IntegratorConfig{});
    REQUIRE(dirty.averaged.entries.size() == 2);
    for (std::size_t g = 0; g < 2; ++g) {
        REQUIRE(dirty.averaged.entries[g].stats);
        CHECK(dirty.averaged.entries[g].stats->mean_abs == clean.entries[g].stats->mean_abs);
        CHECK(dirty.averaged.entries[g].stats->sigma == clean.entries[g].stats->sigma);
    }
}

TEST_CASE("each configuration is reproducible in isolation") {
    const ChainParams c = chain(0.5, 3.0);
    const EnsembleConfig ens = quick(2);
    DisorderConfig dis;
    dis.width = 1.5;
    dis.n_configs = 3;
    dis.master_seed = 4;
    const auto res = disordered_sweep(c, {6}, dis, ens, IntegratorConfig{});
    REQUIRE(res.entries[0].per_config_mean.size() == 3);
    for (std::uint64_t k = 0; k < 3; ++k) {
        ChainParams p = c.with_sites(6);
        p.site_detuning_shifts = sample_disorder(1.5, 4, k, 6);
        const EnsembleStats alone = ensemble_stats(p, ens, IntegratorConfig{});
        CHECK(alone.mean_abs == res.entries[0].per_config_mean[k]);
    }
    const auto& e = res.entries[0];
    double mean = 0.0;
    for (double m : e.per_config_mean) mean += m / 3.0;
    CHECK(e.stats->mean_abs == doctest::Approx(mean).epsilon(1e-14));
    CHECK(e.median >= *std::min_element(e.per_config_mean.begin(), e.per_config_mean.end()));
    CHECK(e.log_mean <= e.stats->mean_abs + 1e-15);
}

TEST_CASE("doubling the configurations shrinks the standard error by about sqrt 2") {
    // Linear chain: each configuration is cheap and deterministic.
    const ChainParams c = chain(0.0, 2.0);
    const EnsembleConfig ens = quick(1, IcMode::Zero);
    DisorderConfig dis;
    dis.width = 1.0;
    dis.master_seed = 99;
    double se[2];
    for (int k = 0; k < 2; ++k) {
        dis.n_configs = k == 0 ? 128 : 256;
        se[k] = disordered_sweep(c, {6}, dis, ens, IntegratorConfig{}).entries[0].log_mean_std_error;
    }
    CHECK(se[0] / se[1] == doctest::Approx(std::sqrt(2.0)).epsilon(0.15));
}

TEST_CASE("phase mapping") {
    CHECK(phase_from_decay(DecayClass::PowerLaw) == PhaseClass::Diffusive);
    CHECK(phase_from_decay(DecayClass::Ballistic) == PhaseClass::Diffusive);
    CHECK(phase_from_decay(DecayClass::Exponential) == PhaseClass::Insulating);
    CHECK(phase_from_decay(DecayClass::Inconclusive) == PhaseClass::Inconclusive);
    CHECK(to_string(PhaseClass::Insulating) == "insulating");
}

TEST_CASE("insulating share grows across coarser disorder bins") {
    // Generated cells: decay y = N^-0.6 exp(-c(W) N) with c growing in W and
    // random scatter, classified exactly as a real scan would be.
    std::mt19937_64 rng(61);
    std::normal_distribution<double> scatter(0.0, 0.05);
    std::vector<PhaseCell> cells;
    for (int rep = 0; rep < 5; ++rep) {
        for (double w = 0.0; w < 8.0; w += 0.5) {
            DisorderedSweepResult sweep;
            for (int n = 40; n <= 200; n += 40) {
                SweepEntry e;
                e.n_sites = n;
                EnsembleStats st;
                st.mean_abs = std::pow(n, -0.6) * std::exp(-0.004 * w * w * n + scatter(rng));
                e.stats = st;
                sweep.averaged.entries.push_back(e);
            }
            cells.push_back(classify_sweep(1.0, w, sweep));
        }
    }
    for (const std::vector<double>& edges : {std::vector<double>{0, 2, 4, 6, 8}, std::vector<double>{0, 4, 8}}) {
        const auto frac = insulating_fraction(cells, edges);
        for (std::size_t k = 1; k < frac.size(); ++k) CHECK(frac[k] >= frac[k - 1]);
    }
    CHECK(insulating_fraction(cells, std::vector<double>{0, 8}).front() > 0.0);
    CHECK_THROWS_AS(insulating_fraction(cells, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("configuration validation") {
    DisorderConfig d;
    d.width = -1.0;
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    d.width = 1.0;
    d.n_configs = 0;
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
}
