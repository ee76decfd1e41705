#include "spatialsep/metrics.hpp"

#include <cstdio>
#include <functional>

namespace spatialsep {

EvalReport evaluate_scene(const std::vector<StereoSignal>& estimates,
                          const std::vector<StereoSignal>& targets,
                          const StereoSignal& mixture,
                          const std::vector<std::string>& labels)
{
    if (estimates.size() != targets.size() || targets.empty()) {
        throw ConfigError("estimate and target counts differ");
    }
    if (!labels.empty() && labels.size() != targets.size()) {
        throw ConfigError("label count does not match source count");
    }

    EvalReport report;
    for (std::size_t k = 0; k < targets.size(); ++k) {
        const auto& est = estimates[k];
        const auto& tgt = targets[k];
        if (est.size() != tgt.size() || tgt.size() != mixture.size()) {
            throw ConfigError("signal lengths differ");
        }
        SourceScores s;
        s.label = labels.empty() ? "source" + std::to_string(k + 1) : labels[k];
        int used = 0;
        for (int c = 0; c < 2; ++c) {
            if (tgt.channel(c).squaredNorm() == 0.0) {
                report.warnings.push_back(s.label + ": silent target channel " + std::to_string(c)
                                          + " skipped");
                continue;
            }
            s.si_sdr += si_sdr(est.channel(c), tgt.channel(c));
            s.sdr += sdr(est.channel(c), tgt.channel(c));
            s.mixture_si_sdr += si_sdr(mixture.channel(c), tgt.channel(c));
            s.mixture_sdr += sdr(mixture.channel(c), tgt.channel(c));
            ++used;
        }
        if (used == 0) {
            throw ConfigError("silent target");
        }
        s.si_sdr /= used;
        s.sdr /= used;
        s.mixture_si_sdr /= used;
        s.mixture_sdr /= used;
        s.delta_si_sdr = s.si_sdr - s.mixture_si_sdr;
        s.delta_sdr = s.sdr - s.mixture_sdr;
        report.sources.push_back(std::move(s));
    }

    auto& avg = report.average;
    avg.label = "Avg.";
    const double n = static_cast<double>(report.sources.size());
    for (const auto& s : report.sources) {
        avg.si_sdr += s.si_sdr / n;
        avg.sdr += s.sdr / n;
        avg.mixture_si_sdr += s.mixture_si_sdr / n;
        avg.mixture_sdr += s.mixture_sdr / n;
        avg.delta_si_sdr += s.delta_si_sdr / n;
        avg.delta_sdr += s.delta_sdr / n;
    }
    return report;
}

std::string to_csv(const EvalReport& report)
{
    using Field = double SourceScores::*;
    const std::pair<const char*, Field> rows[] = {
        {"mixture_si_sdr", &SourceScores::mixture_si_sdr},
        {"mixture_sdr", &SourceScores::mixture_sdr},
        {"si_sdr", &SourceScores::si_sdr},
        {"sdr", &SourceScores::sdr},
        {"delta_si_sdr", &SourceScores::delta_si_sdr},
        {"delta_sdr", &SourceScores::delta_sdr},
    };

    std::string out = "metric";
    for (const auto& s : report.sources) {
        out += "," + s.label;
    }
    out += "," + report.average.label + "\n";

    char buf[64];
    for (const auto& [name, field] : rows) {
        out += name;
        for (const auto& s : report.sources) {
            std::snprintf(buf, sizeof buf, ",%.6f", s.*field);
            out += buf;
        }
        std::snprintf(buf, sizeof buf, ",%.6f\n", report.average.*field);
        out += buf;
    }
    return out;
}

} // namespace spatialsep
