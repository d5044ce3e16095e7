#include "fishtank/estimators.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "fishtank/sampling.hpp"

namespace fishtank {

namespace {
constexpr uint64_t kCalibrationSeed = 0x0ca11b7a7e5eed01ULL;

double raw_estimate(const LlSketch& s, EstimatorKind kind) {
    const auto& p = s.params();
    const double lnq = std::log(p.q);
    if (kind == EstimatorKind::Harmonic) {
        double denom = 0.0;
        for (uint32_t i = 0; i < p.m; ++i)
            denom += std::exp(-(double(s.reg(i)) + s.offsets()[i]) * lnq);
        return double(p.m) / denom;
    }
    double mean_reg = 0.0;
    for (uint32_t i = 0; i < p.m; ++i) mean_reg += s.reg(i);
    mean_reg /= double(p.m);
    return double(p.m) * std::exp(mean_reg * lnq);
}
}  // namespace

Estimate ll_estimate_harmonic(const LlSketch& s, double alpha) {
    return {alpha * raw_estimate(s, EstimatorKind::Harmonic), EstimatorKind::Harmonic, false};
}

Estimate ll_estimate_geometric(const LlSketch& s, double c) {
    return {c * raw_estimate(s, EstimatorKind::Geometric), EstimatorKind::Geometric, false};
}

double calibrate_constant(const SketchParams& params, const std::vector<double>& offsets,
                          EstimatorKind kind, double lambda_ref, uint32_t trials) {
    if (trials < 100) throw std::invalid_argument("calibration needs >= 100 trials");
    const OracleSeed seed{kCalibrationSeed};
    double mean = 0.0;
    for (uint32_t t = 0; t < trials; ++t) {
        const LlSketch s = sample_ll_state(params, seed, offsets, lambda_ref, t, false);
        mean += raw_estimate(s, kind);
    }
    mean /= double(trials);
    return lambda_ref / mean;
}

AlphaCache::AlphaCache(std::string path) : path_(std::move(path)) {}

double AlphaCache::get(const SketchParams& params, const std::vector<double>& offsets,
                       EstimatorKind kind, double lambda_ref, uint32_t trials) {
    const bool cacheable = params.offsets != OffsetMode::Random;
    const std::string file =
        kind == EstimatorKind::Harmonic ? path_ : path_ + ".geometric";
    if (cacheable) {
        std::ifstream in(file);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == 'q') continue;  // header
            std::istringstream row(line);
            std::string field;
            double q = 0, alpha = 0;
            unsigned m = 0, mode = 0;
            if (std::getline(row, field, ',')) q = std::stod(field);
            if (std::getline(row, field, ',')) m = unsigned(std::stoul(field));
            if (std::getline(row, field, ',')) mode = unsigned(std::stoul(field));
            if (std::getline(row, field, ',')) alpha = std::stod(field);
            if (q == params.q && m == params.m && mode == unsigned(params.offsets)) return alpha;
        }
    }
    const double alpha = calibrate_constant(params, offsets, kind, lambda_ref, trials);
    if (cacheable) {
        std::ofstream out(file, std::ios::app);
        if (out.tellp() == 0) out << "q,m,offset_mode,alpha\n";
        out.precision(17);
        out << params.q << ',' << params.m << ',' << unsigned(params.offsets) << ',' << alpha
            << '\n';
    }
    return alpha;
}

}  // namespace fishtank
