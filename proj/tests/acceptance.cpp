// Acceptance gate. Each criterion prints one PASS/FAIL line with the numbers
// it was judged on. Usage: acceptance [criterion ...]; no arguments runs all.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "photon_lattice/cli.hpp"
#include "photon_lattice/disorder.hpp"
#include "photon_lattice/parallel.hpp"
#include "photon_lattice/stability.hpp"
#include "support.hpp"

using namespace photon_lattice;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

class Detail {
public:
    template <typename T>
    Detail& operator<<(const T& v) {
        os_ << v;
        return *this;
    }
    std::string str() const { return os_.str(); }

private:
    std::ostringstream os_;
};

constexpr std::uint64_t kSeed = 7;

ChainParams chain(double u, double p, double kappa_bulk = 0.0) {
    ChainParams c;
    c.n_sites = 1;
    c.nonlinearity = u;
    c.drive_amplitude = p;
    c.kappa_bulk = kappa_bulk;
    return c;
}

EnsembleConfig ensemble(int realizations, IcMode mode = IcMode::Random) {
    EnsembleConfig e;
    e.n_realizations = realizations;
    e.master_seed = kSeed;
    e.ic_mode = mode;
    return e;
}

std::vector<int> grid(int from, int to, int step) {
    std::vector<int> g;
    for (int n = from; n <= to; n += step) g.push_back(n);
    return g;
}

std::string show(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string("none"); }

std::string describe(const DecayClassification& c) {
    Detail d;
    d << to_string(c.decay);
    if (c.power) d << " (power b=" << c.power->exponent_or_rate << " r2=" << c.power->r_squared;
    if (c.exponential) d << "; exp c=" << c.exponential->exponent_or_rate << " r2=" << c.exponential->r_squared << ")";
    return d.str();
}

Verdict dichotomy() {
    const ChainParams base = chain(1.0, 10.0);
    const EnsembleStats stable = ensemble_stats(base.with_sites(20), ensemble(1, IcMode::Zero), IntegratorConfig{});
    const EnsembleStats chaotic = ensemble_stats(base.with_sites(100), ensemble(16), IntegratorConfig{});
    int above = 0;
    for (const auto& r : chaotic.per_realization) above += std::sqrt(r.time_variance) > 0.05;
    const int total = static_cast<int>(chaotic.per_realization.size());
    const bool pass = stable.sigma < 0.05 && total == 16 && above >= 15;
    return {pass, (Detail() << "N=20 zero-IC sigma=" << stable.sigma << "; N=100 " << above << "/" << total
                            << " realizations with sigma>0.05 (need >=15), pooled sigma=" << chaotic.sigma)
                      .str()};
}

Verdict threshold_bracket() {
    const ThresholdReport r = detect_threshold(chain(1.0, 10.0), grid(10, 120, 10), ensemble(16), IntegratorConfig{});
    const bool pass = r.n_t && *r.n_t > 20 && *r.n_t <= 100;
    return {pass, "N_t=" + show(r.n_t) + " on 10:120:10 (need 20 < N_t <= 100)"};
}

Verdict ballistic() {
    // The slowest linear mode at N=50 decays at ~1e-4 J, so the transient
    // must be long for sigma to reach 1e-10.
    EnsembleConfig ens = ensemble(1, IcMode::Zero);
    ens.transient_time = 2.5e5;
    ens.window_time = 1000.0;
    const auto sweep = length_sweep(chain(0.0, 10.0), grid(5, 50, 5), ens, IntegratorConfig{});
    double worst_oracle = 0.0, worst_sigma = 0.0, spread[2] = {0.0, 0.0};
    double first[2] = {-1.0, -1.0};
    for (const auto& e : sweep.entries) {
        if (!e.stats) return {false, "N=" + std::to_string(e.n_sites) + " failed: " + e.error};
        const Field oracle = testsupport::dense_linear_fixed_point(sweep.params.with_sites(e.n_sites));
        worst_oracle = std::max(worst_oracle, std::abs(e.stats->mean_abs - std::abs(oracle.back())));
        worst_sigma = std::max(worst_sigma, e.stats->sigma);
        const int parity = e.n_sites % 2;
        if (first[parity] < 0.0) first[parity] = e.stats->mean_abs;
        spread[parity] = std::max(spread[parity], std::abs(e.stats->mean_abs - first[parity]));
    }
    const bool pass = worst_oracle <= 1e-6 && worst_sigma <= 1e-10 && spread[0] <= 1e-6 && spread[1] <= 1e-6;
    return {pass, (Detail() << "max |mean - oracle|=" << worst_oracle << ", max sigma=" << worst_sigma
                            << ", spread within odd N=" << spread[1] << " (|a_N|=" << first[1]
                            << "), within even N=" << spread[0] << " (|a_N|=" << first[0] << ")")
                      .str()};
}

Verdict threshold_trends() {
    ThresholdConfig tc;
    tc.refine = true;
    const auto g = grid(10, 200, 10);
    bool pass = true;
    Detail d;
    const std::pair<ScanAxis, ChainParams> scans[] = {{ScanAxis::Nonlinearity, chain(0.5, 5.0)},
                                                      {ScanAxis::Drive, chain(0.5, 5.0)}};
    const std::vector<double> values[] = {{0.5, 1.0, 2.0}, {5.0, 10.0, 20.0}};
    for (int k = 0; k < 2; ++k) {
        const auto r = threshold_scaling(scans[k].second, scans[k].first, values[k], g, ensemble(16), IntegratorConfig{}, tc);
        d << to_string(r.axis) << ":";
        std::optional<int> previous;
        for (const auto& [v, rep] : r.reports) {
            d << " " << v << "->" << show(rep.n_t);
            if (!rep.n_t || (previous && *rep.n_t >= *previous)) pass = false;
            previous = rep.n_t;
        }
        if (r.fit) {
            d << " fit b=" << r.fit->exponent_or_rate << " r2=" << r.fit->r_squared << "; ";
            pass = pass && r.fit->r_squared >= 0.9;
        } else {
            d << " no fit; ";
            pass = false;
        }
    }
    return {pass, d.str()};
}

Verdict super_diffusive() {
    const std::vector<int> g = {10, 20, 30, 40, 60, 80, 100, 140, 180, 220, 260, 300};
    const auto sweep = length_sweep(chain(1.0, 10.0), g, ensemble(16), IntegratorConfig{});
    const ThresholdReport rep = threshold_from_sweep(sweep);
    if (!rep.n_t) return {false, "no threshold on the grid"};
    const auto cls = classify_decay(mean_abs_points(sweep, rep.n_t));
    const bool pass = cls.decay == DecayClass::PowerLaw && cls.power->r_squared >= 0.9;
    return {pass, "N_t=" + show(rep.n_t) + ", N > N_t up to 300: " + describe(cls)};
}

Verdict bulk_loss() {
    const auto g = grid(10, 150, 10);
    const auto strong = length_sweep(chain(1.0, 10.0, 1.0), g, ensemble(16), IntegratorConfig{});
    const ThresholdReport rs = threshold_from_sweep(strong);
    const auto cls = classify_decay(mean_abs_points(strong));
    const ThresholdReport weak = detect_threshold(chain(1.0, 10.0, 0.05), g, ensemble(16), IntegratorConfig{});
    const bool pass = !rs.n_t && cls.decay == DecayClass::Exponential && weak.n_t && weak.n_t_end;
    return {pass, "kappa_bulk=1: N_t=" + show(rs.n_t) + ", " + describe(cls) + "; kappa_bulk=0.05: N_t=" +
                      show(weak.n_t) + ", N_t_end=" + show(weak.n_t_end)};
}

Verdict stability_suite() {
    std::mt19937_64 rng(kSeed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    double worst_fd = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + trial % 9;
        const ChainParams c = testsupport::random_params(rng, n);
        const Field a = testsupport::random_field(rng, n, 3.0);
        const Eigen::MatrixXd analytic = flow_jacobian(FieldState{a, 0.0}, c);
        const Eigen::MatrixXd fd = testsupport::fd_jacobian(a, c);
        worst_fd = std::max(worst_fd, (analytic - fd).cwiseAbs().maxCoeff() / analytic.cwiseAbs().maxCoeff());
    }

    double worst_abscissa = 0.0, worst_pairing = 0.0;
    int stable_points = 0;
    for (int trial = 0; trial < 500 && stable_points < 10; ++trial) {
        ChainParams c = chain(uni(rng), 0.5 + 4.0 * uni(rng), 0.05 * uni(rng));
        c.n_sites = 2 + trial % 11;
        c.detuning = uni(rng) - 0.5;
        const SteadyState ss = solve_steady_state(c);
        if (!ss.converged) continue;
        const double oracle = testsupport::abscissa_oracle(testsupport::fd_jacobian(ss.alpha_s, c));
        if (!(oracle < 0.0)) continue;
        const BdgSpectrum spec = growth_rate(assemble_bdg(c, ss));
        worst_abscissa = std::max(
            worst_abscissa, std::abs(spec.max_im - spectral_abscissa(flow_jacobian(FieldState{ss.alpha_s, 0.0}, c))));
        worst_pairing = std::max(worst_pairing, testsupport::pairing_gap(spec.eigenvalues));
        ++stable_points;
    }

    const auto scan = stability_scan(chain(0.5, 10.0), grid(2, 80, 2));
    bool monotone = true;
    int converged = 0, last_n = 0;
    double previous = -1e300, last_im = 0.0;
    for (const auto& e : scan) {
        if (!e.spectrum) break;
        monotone = monotone && e.spectrum->max_im > previous && e.spectrum->max_im < 0.0;
        previous = last_im = e.spectrum->max_im;
        last_n = e.n_sites;
        ++converged;
    }

    const bool pass = worst_fd <= 1e-6 && stable_points == 10 && worst_abscissa <= 1e-8 && worst_pairing <= 1e-8 &&
                      monotone && converged >= 5;
    return {pass, (Detail() << "(a) max rel Jacobian-FD=" << worst_fd << " (b) " << stable_points
                            << " fixed points, max |growth - abscissa|=" << worst_abscissa
                            << " (c) max pairing gap=" << worst_pairing << " (d) " << converged
                            << " converged lengths up to N=" << last_n << ", monotone=" << (monotone ? "yes" : "no")
                            << ", last max Im E=" << last_im)
                      .str()};
}

Verdict disorder_crossover() {
    DisorderConfig dis;
    dis.n_configs = 64;
    dis.master_seed = kSeed;
    const auto g = grid(40, 200, 40);
    const ChainParams base = chain(5.0, 10.0);
    const EnsembleConfig ens = ensemble(1, IcMode::Zero);
    dis.width = 0.0;
    const PhaseCell clean = classify_sweep(5.0, 0.0, disordered_sweep(base, g, dis, ens, IntegratorConfig{}));
    dis.width = 5.0;
    const PhaseCell dirty = classify_sweep(5.0, 5.0, disordered_sweep(base, g, dis, ens, IntegratorConfig{}));
    const bool pass = clean.decay.decay == DecayClass::PowerLaw && dirty.decay.decay == DecayClass::Exponential;
    return {pass, "W=0: " + describe(clean.decay) + "; W=5: " + describe(dirty.decay)};
}

// Net intensity injected by the drive minus boundary and bulk losses,
// written out independently of the library.
double source_oracle(const Field& a, const ChainParams& c) {
    const std::size_t n = a.size();
    double s = -2.0 * c.drive_amplitude * a.front().imag();
    if (n == 1) return s - c.kappa_boundary * std::norm(a.front());
    s -= c.kappa_boundary * (std::norm(a.front()) + std::norm(a.back()));
    for (std::size_t i = 1; i + 1 < n; ++i) s -= c.kappa_bulk * std::norm(a[i]);
    return s;
}

double intensity(const Field& a) {
    double s = 0.0;
    for (const auto& z : a) s += std::norm(z);
    return s;
}

Verdict energy_balance() {
    std::mt19937_64 rng(kSeed);
    const int lengths[] = {5, 10, 20, 30, 40, 60, 80, 100, 120, 150};
    IntegratorConfig cfg;
    cfg.t_end = 300.0;
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
        ChainParams c = chain(1.0, 10.0, k % 3 == 0 ? 0.05 : 0.0);
        c.n_sites = lengths[k];
        // Hermite-Simpson quadrature of the source over each accepted step.
        auto observer = [&](const FieldState& a, const Field& da, const FieldState& b, const Field& db) {
            const double h = b.time - a.time;
            Field mid(a.amplitudes.size());
            for (std::size_t j = 0; j < mid.size(); ++j) {
                mid[j] = 0.5 * (a.amplitudes[j] + b.amplitudes[j]) + h / 8.0 * (da[j] - db[j]);
            }
            const double budget = h / 6.0 *
                                  (source_oracle(a.amplitudes, c) + 4.0 * source_oracle(mid, c) +
                                   source_oracle(b.amplitudes, c));
            const double change = intensity(b.amplitudes) - intensity(a.amplitudes);
            const double scale = std::max({1.0, intensity(a.amplitudes), intensity(b.amplitudes)});
            worst = std::max(worst, std::abs(change - budget) / scale);
        };
        integrate(c, FieldState{testsupport::random_field(rng, c.n_sites, 1.0), 0.0}, cfg, "random", observer);
    }
    const bool pass = worst <= 100.0 * cfg.rel_tol;
    return {pass, (Detail() << "max per-step relative residual=" << worst << " over 10 trajectories N=5..150 (limit "
                            << 100.0 * cfg.rel_tol << ")")
                      .str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Verdict determinism() {
    const fs::path root = fs::temp_directory_path() / "photon_lattice_acceptance_determinism";
    fs::remove_all(root);
    const std::vector<std::vector<std::string>> commands = {
        {"simulate", "--sites", "60", "--t-end", "300", "--transient", "100", "--seed", "3"},
        {"sweep", "--sites", "10:60:10", "--realizations", "4", "--transient", "100", "--window", "200", "--seed", "3"},
        {"threshold", "--sites", "10:60:10", "--realizations", "4", "--transient", "100", "--window", "200",
         "--refine", "true"},
        {"disorder", "--sites", "10:40:10", "--w", "2", "--configs", "4", "--realizations", "2", "--transient", "100",
         "--window", "100"},
    };
    int compared = 0;
    for (std::size_t k = 0; k < commands.size(); ++k) {
        fs::path dirs[2];
        for (int rep = 0; rep < 2; ++rep) {
            dirs[rep] = root / (std::to_string(k) + "_" + std::to_string(rep));
            auto args = commands[k];
            args.insert(args.end(), {"--out", dirs[rep].string()});
            std::ostringstream out, err;
            // Thread count must not matter either.
            set_worker_count(rep == 0 ? 1u : 4u);
            const int code = cli::run(args, out, err);
            set_worker_count(0);
            if (code != 0) return {false, commands[k][0] + " exited " + std::to_string(code) + ": " + err.str()};
        }
        for (const auto& entry : fs::directory_iterator(dirs[0])) {
            if (entry.path().extension() != ".csv") continue;
            if (slurp(entry.path()) != slurp(dirs[1] / entry.path().filename())) {
                return {false, commands[k][0] + ": " + entry.path().filename().string() + " differs"};
            }
            ++compared;
        }
    }
    return {compared > 0, std::to_string(compared) + " CSV files byte-identical across repeated runs (1 vs 4 threads)"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"dichotomy", dichotomy},
        {"threshold_bracket", threshold_bracket},
        {"ballistic", ballistic},
        {"threshold_trends", threshold_trends},
        {"super_diffusive", super_diffusive},
        {"bulk_loss", bulk_loss},
        {"stability", stability_suite},
        {"disorder", disorder_crossover},
        {"energy_balance", energy_balance},
        {"determinism", determinism},
    };
    std::vector<std::string> wanted(argv + 1, argv + argc);
    for (const auto& w : wanted) {
        const bool known = std::any_of(criteria.begin(), criteria.end(), [&](const auto& c) { return c.first == w; });
        if (!known) {
            std::cerr << "unknown criterion '" << w << "'\n";
            return 2;
        }
    }
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << " [" << std::fixed
                  << std::setprecision(1) << secs << " s]" << std::defaultfloat << std::setprecision(6) << std::endl;
        failed += !v.pass;
    }
    return failed == 0 ? 0 : 1;
}
