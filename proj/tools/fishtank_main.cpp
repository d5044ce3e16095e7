#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "fishtank/estimators.hpp"
#include "fishtank/infotheory.hpp"
#include "fishtank/martingale.hpp"
#include "fishtank/sampling.hpp"
#include "fishtank/serialize.hpp"
#include "fishtank/study.hpp"

namespace ft = fishtank;

namespace {

// "a:b:n" -> n geometrically spaced points in [a, b]; otherwise a comma list.
std::vector<double> parse_lambdas(const std::string& spec) {
    std::vector<double> out;
    if (std::count(spec.begin(), spec.end(), ':') == 2) {
        double lo, hi;
        int steps;
        char c1, c2;
        std::istringstream ss(spec);
        ss >> lo >> c1 >> hi >> c2 >> steps;
        if (!ss || steps < 1 || lo <= 0 || hi < lo) throw CLI::ValidationError("bad lambda range");
        for (int i = 0; i < steps; ++i)
            out.push_back(steps == 1 ? lo : lo * std::pow(hi / lo, double(i) / (steps - 1)));
        return out;
    }
    std::istringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

ft::OffsetMode parse_offsets(const std::string& s) {
    if (s == "none") return ft::OffsetMode::None;
    if (s == "uniform") return ft::OffsetMode::Uniform;
    if (s == "random") return ft::OffsetMode::Random;
    throw CLI::ValidationError("offsets must be none|uniform|random");
}

ft::EstimatorKind parse_estimator(const std::string& s) {
    if (s == "mle") return ft::EstimatorKind::Mle;
    if (s == "harmonic") return ft::EstimatorKind::Harmonic;
    if (s == "geometric") return ft::EstimatorKind::Geometric;
    if (s == "martingale") return ft::EstimatorKind::Martingale;
    throw CLI::ValidationError("estimator must be mle|harmonic|geometric|martingale");
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw CLI::ValidationError("cannot open " + path);
    return file;
}

uint64_t parse_element(const std::string& line) {
    try {
        size_t pos = 0;
        const uint64_t v = std::stoull(line, &pos);
        if (pos == line.size()) return v;
    } catch (...) {
    }
    // Non-numeric tokens get hashed (FNV-1a).
    uint64_t h = 0xcbf29ce484222325ull;
    for (char c : line) {
        h ^= uint8_t(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

int cmd_info(double q, const std::string& sketch, const std::string& curve, bool verify,
             const std::string& out_path) {
    std::ofstream file;
    std::ostream& os = open_out(out_path, file);
    if (verify) {
        const ft::LemmaReport rep = ft::verify_lemmas();
        for (const auto& c : rep.checks)
            os << (c.pass ? "pass" : "FAIL") << ',' << c.name << ','
               << ft::format_double(c.detail) << '\n';
        return rep.all_pass() ? 0 : 1;
    }
    const bool pcsa = sketch == "pcsa";
    if (!curve.empty()) {
        const auto lambdas = parse_lambdas(curve);
        os << "lambda,entropy_bits,norm_info\n";
        for (double lam : lambdas) {
            const ft::CurvePoint p = pcsa ? ft::pcsa_curves(q, lam) : ft::ll_curves(q, lam);
            os << ft::format_double(p.lambda) << ',' << ft::format_double(p.entropy_bits) << ','
               << ft::format_double(p.norm_info) << '\n';
        }
        return 0;
    }
    const ft::FishReport rep = pcsa ? ft::fish_pcsa(q) : ft::fish_ll(q);
    os << "statistic,value\n";
    os << "h_avg," << ft::format_double(rep.h_avg) << '\n';
    os << "i_avg," << ft::format_double(rep.i_avg) << '\n';
    os << "fish," << ft::format_double(rep.fish) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cardinality sketch laboratory"};
    app.require_subcommand(1);

    // info
    auto* info = app.add_subcommand("info", "fish numbers, curves, lemma checks");
    double q = 2.0;
    std::string sketch = "pcsa", curve, out_path;
    bool verify = false;
    info->add_option("--q", q, "base (q > 1)");
    info->add_option("--sketch", sketch, "pcsa|ll")->check(CLI::IsMember({"pcsa", "ll"}));
    info->add_option("--curve", curve, "lambda range lo:hi:steps for curve CSV");
    info->add_flag("--verify-lemmas", verify, "run the numeric lemma checks");
    info->add_option("--out", out_path, "output CSV path (default stdout)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Monte-Carlo estimator error study");
    ft::TrialConfig cfg;
    std::string sim_sketch = "ll", sim_est = "harmonic", sim_off = "none", sim_lambdas = "1048576";
    std::string sim_out;
    uint64_t sim_seed = 1;
    unsigned sim_w = 0;
    sim->add_option("--sketch", sim_sketch, "pcsa|ll")->check(CLI::IsMember({"pcsa", "ll"}));
    sim->add_option("--estimator", sim_est, "mle|harmonic|geometric|martingale");
    sim->add_option("--q", cfg.params.q, "base (q > 1)");
    sim->add_option("--m", cfg.params.m, "number of copies");
    sim->add_option("--w", sim_w, "columns / max register (default: covers 2^64)");
    sim->add_option("--offsets", sim_off, "none|uniform|random");
    sim->add_option("--lambdas", sim_lambdas, "comma list or lo:hi:steps");
    sim->add_option("--trials", cfg.trials, "trials per cardinality");
    sim->add_option("--seed", sim_seed, "oracle seed");
    sim->add_option("--threads", cfg.threads, "worker threads (0 = all)");
    sim->add_option("--alpha", cfg.constant, "estimator constant (0 = calibrate)");
    sim->add_flag("--poissonize", cfg.poissonize, "Poisson(1) multiplicity per element");
    sim->add_option("--out", sim_out, "output CSV path");

    // fishmonger
    auto* fm = app.add_subcommand("fishmonger", "compressed-sketch space/error audit");
    uint32_t fm_m = 256, fm_trials = 100;
    uint64_t fm_lambda = 1 << 20, fm_seed = 1;
    double fm_delta = 0.05;
    unsigned fm_threads = 0;
    std::string fm_out;
    fm->add_option("--m", fm_m, "rows");
    fm->add_option("--lambda-max", fm_lambda, "stream length");
    fm->add_option("--trials", fm_trials, "independent streams");
    fm->add_option("--delta", fm_delta, "entropy slack factor");
    fm->add_option("--seed", fm_seed, "oracle seed");
    fm->add_option("--threads", fm_threads, "worker threads (0 = all)");
    fm->add_option("--out", fm_out, "output CSV path");

    // hbb
    auto* hbb = app.add_subcommand("hbb", "order-sensitivity demo");
    uint64_t hbb_lambda = 400000, hbb_seed = 1;
    uint32_t hbb_trials = 2000;
    unsigned hbb_threads = 0;
    std::string hbb_until, hbb_out;
    hbb->add_option("--lambda", hbb_lambda, "cardinality");
    hbb->add_option("--trials", hbb_trials, "experiments per sequence");
    hbb->add_option("--seed", hbb_seed, "oracle seed");
    hbb->add_option("--threads", hbb_threads, "worker threads (0 = all)");
    hbb->add_option("--until", hbb_until, "terminating state L=<l>,HW=<w>");
    hbb->add_option("--out", hbb_out, "output CSV path");

    // merge
    auto* merge = app.add_subcommand("merge", "merge sketch files");
    std::vector<std::string> merge_in;
    std::string merge_out = "merged.sketch";
    merge->add_option("files", merge_in, "input sketch files")->required();
    merge->add_option("--out", merge_out, "output sketch file");

    // sketch
    auto* sk = app.add_subcommand("sketch", "build a sketch from an element stream");
    std::string sk_kind = "pcsa", sk_off = "none", sk_in = "-", sk_out = "stream.sketch";
    ft::SketchParams sk_params;
    uint64_t sk_seed = 1;
    unsigned sk_w = 0;
    bool sk_estimate = false, sk_poissonize = false;
    sk->add_option("--kind", sk_kind, "pcsa|ll|martingale-pcsa|martingale-ll");
    sk->add_option("--q", sk_params.q, "base (q > 1)");
    sk->add_option("--m", sk_params.m, "number of copies");
    sk->add_option("--w", sk_w, "columns / max register (default: covers 2^64)");
    sk->add_option("--offsets", sk_off, "none|uniform|random");
    sk->add_option("--seed", sk_seed, "oracle seed");
    sk->add_option("--in", sk_in, "newline-delimited elements ('-' = stdin)");
    sk->add_option("--out", sk_out, "output sketch file");
    sk->add_flag("--estimate", sk_estimate, "print the estimate after building");
    sk->add_flag("--poissonize", sk_poissonize, "Poisson(1) multiplicity per element");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*info) return cmd_info(q, sketch, curve, verify, out_path);

        if (*sim) {
            cfg.sketch = sim_sketch == "pcsa" ? ft::SketchKind::Pcsa : ft::SketchKind::Ll;
            cfg.estimator = parse_estimator(sim_est);
            cfg.params.offsets = parse_offsets(sim_off);
            cfg.params.w = sim_w ? sim_w : ft::default_w(cfg.params.q);
            cfg.lambdas = parse_lambdas(sim_lambdas);
            cfg.seed = ft::OracleSeed{sim_seed};
            const auto results = ft::run_error_study(cfg);
            std::ofstream file;
            ft::write_study_csv(open_out(sim_out, file), results);
            return 0;
        }

        if (*fm) {
            const auto rep = ft::run_fishmonger_audit(fm_m, fm_lambda, fm_trials,
                                                      ft::OracleSeed{fm_seed}, fm_delta,
                                                      fm_threads);
            std::ofstream file;
            ft::write_fm_audit_csv(open_out(fm_out, file), rep);
            if (!rep.budget_respected) {
                std::cerr << "budget exceeded during stream\n";
                return 1;
            }
            return 0;
        }

        if (*hbb) {
            std::ofstream file;
            std::ostream& os = open_out(hbb_out, file);
            if (!hbb_until.empty()) {
                uint32_t level = 0, hw = 0;
                if (std::sscanf(hbb_until.c_str(), "L=%u,HW=%u", &level, &hw) != 2)
                    throw CLI::ValidationError("--until expects L=<l>,HW=<w>");
                const auto rep = ft::run_hbb_termination(level, hw, hbb_trials,
                                                         ft::OracleSeed{hbb_seed}, hbb_threads);
                os << "statistic,value\n";
                os << "mean_distinct_hi," << ft::format_double(rep.mean_distinct_hi) << '\n';
                os << "mean_distinct_lo," << ft::format_double(rep.mean_distinct_lo) << '\n';
                return 0;
            }
            const auto rep =
                ft::run_hbb_demo(hbb_lambda, hbb_trials, ft::OracleSeed{hbb_seed}, hbb_threads);
            os << "statistic,value\n";
            os << "hi_frac_high," << ft::format_double(rep.hi_frac_high) << '\n';
            os << "lo_frac_low," << ft::format_double(rep.lo_frac_low) << '\n';
            os << "ks_level," << ft::format_double(rep.ks_level) << '\n';
            ft::write_hbb_csv(os, rep);
            return 0;
        }

        if (*merge) {
            const ft::AnySketch merged = ft::merge_sketch_files(merge_in);
            ft::save_sketch_file(merge_out, merged);
            return 0;
        }

        if (*sk) {
            sk_params.offsets = parse_offsets(sk_off);
            sk_params.w = sk_w ? sk_w : ft::default_w(sk_params.q);
            const ft::OracleSeed seed{sk_seed};

            std::ifstream file_in;
            std::istream& is = sk_in == "-" ? std::cin : (file_in.open(sk_in), file_in);
            if (sk_in != "-" && !file_in) throw CLI::ValidationError("cannot open " + sk_in);

            auto build = [&](auto& sketch) {
                std::string line;
                while (std::getline(is, line)) {
                    if (line.empty()) continue;
                    const uint64_t id = parse_element(line);
                    if (sk_poissonize) {
                        const uint32_t mult = ft::poisson_multiplicity(seed, id);
                        for (uint32_t c = 1; c <= mult; ++c)
                            sketch.insert(ft::poisson_copy_id(id, c));
                    } else {
                        sketch.insert(id);
                    }
                }
            };

            ft::AnySketch out = [&]() -> ft::AnySketch {
                if (sk_kind == "pcsa") return ft::PcsaSketch(sk_params, seed);
                if (sk_kind == "ll") return ft::LlSketch(sk_params, seed);
                if (sk_kind == "martingale-pcsa")
                    return ft::MartingaleSketch<ft::PcsaSketch>(ft::PcsaSketch(sk_params, seed));
                if (sk_kind == "martingale-ll")
                    return ft::MartingaleSketch<ft::LlSketch>(ft::LlSketch(sk_params, seed));
                throw CLI::ValidationError("bad --kind");
            }();
            std::visit([&](auto& s) { build(s); }, out);
            ft::save_sketch_file(sk_out, out);

            if (sk_estimate) {
                std::visit(
                    [&](auto& s) {
                        using T = std::decay_t<decltype(s)>;
                        if constexpr (std::is_same_v<T, ft::PcsaSketch>)
                            std::cout << ft::format_double(ft::pcsa_mle(s).value) << '\n';
                        else if constexpr (std::is_same_v<T, ft::LlSketch>)
                            std::cout << ft::format_double(ft::ll_mle(s).value) << '\n';
                        else
                            std::cout << ft::format_double(s.estimate()) << '\n';
                    },
                    out);
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
