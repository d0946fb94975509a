#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "ranplan/errors.hpp"

namespace ranplan {

struct SampleSeries {
    std::string label;
    std::vector<double> samples;
    int run_count = 1;

    void validate() const {
        if (run_count < 1) throw ConfigError("run_count must be >= 1");
        for (double s : samples)
            if (!std::isfinite(s)) throw ConfigError("samples must be finite");
    }
};

struct VideoSession {
    std::string label;
    double total_duration_s = 0.0;
    std::vector<double> stall_durations_s;
    std::vector<double> bitrate_samples_mbps;

    void validate() const {
        double total_stall = 0.0;
        for (double s : stall_durations_s) {
            if (s < 0.0) throw ConfigError("stall durations must be non-negative");
            total_stall += s;
        }
        if (total_stall > total_duration_s)
            throw ConfigError("stall time exceeds session duration");
    }
};

struct ConfidenceInterval {
    double mean = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t n = 0;
    std::string warning;  // non-empty for degenerate cases
};

// Student-t interval: mean +/- t_{n-1, (1+level)/2} * s / sqrt(n). A single
// sample yields the degenerate interval [mean, mean] plus a warning.
inline ConfidenceInterval mean_ci(const SampleSeries& series, double level = 0.95) {
    if (series.samples.empty()) throw ConfigError("mean_ci needs at least one sample");
    series.validate();
    if (!(level > 0.0 && level < 1.0)) throw ConfigError("confidence level must be in (0, 1)");

    ConfidenceInterval ci;
    ci.n = series.samples.size();
    ci.mean = std::accumulate(series.samples.begin(), series.samples.end(), 0.0) /
              static_cast<double>(ci.n);
    if (ci.n == 1) {
        ci.lo = ci.hi = ci.mean;
        ci.warning = "single sample: degenerate interval";
        return ci;
    }
    double ss = 0.0;
    for (double s : series.samples) ss += (s - ci.mean) * (s - ci.mean);
    const double sd = std::sqrt(ss / static_cast<double>(ci.n - 1));
    const boost::math::students_t dist(static_cast<double>(ci.n - 1));
    const double tq = boost::math::quantile(dist, 0.5 + level / 2.0);
    const double half = tq * sd / std::sqrt(static_cast<double>(ci.n));
    ci.lo = ci.mean - half;
    ci.hi = ci.mean + half;
    return ci;
}

inline double rebuffer_ratio(const VideoSession& session) {
    if (!(session.total_duration_s > 0.0))
        throw ConfigError("session duration must be > 0");
    session.validate();
    const double stalled = std::accumulate(session.stall_durations_s.begin(),
                                           session.stall_durations_s.end(), 0.0);
    return stalled / session.total_duration_s;
}

using IngestResult = std::variant<SampleSeries, VideoSession>;

// Two CSV schemas are accepted:
//   timestamp,value            -> SampleSeries
//   event,start,duration       -> VideoSession (events: session, stall, bitrate)
// The header row selects the schema.
inline IngestResult ingest_csv(std::istream& in, const std::string& label) {
    std::string line;
    int row = 0;

    auto fail = [&](const std::string& msg) {
        throw ParseError(label + ": row " + std::to_string(row) + ": " + msg);
    };

    auto split = [](const std::string& text) {
        std::vector<std::string> fields;
        std::stringstream ss(text);
        std::string field;
        while (std::getline(ss, field, ',')) {
            field.erase(0, field.find_first_not_of(" \t\r"));
            field.erase(field.find_last_not_of(" \t\r") + 1);
            fields.push_back(field);
        }
        return fields;
    };

    if (!std::getline(in, line)) throw ParseError(label + ": empty file");
    ++row;
    const auto header = split(line);

    if (header.size() == 2 && header[0] == "timestamp" && header[1] == "value") {
        SampleSeries series;
        series.label = label;
        while (std::getline(in, line)) {
            ++row;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            const auto fields = split(line);
            if (fields.size() != 2) fail("expected 2 columns");
            try {
                std::stod(fields[0]);
                series.samples.push_back(std::stod(fields[1]));
            } catch (const std::exception&) {
                fail("non-numeric field");
            }
            if (!std::isfinite(series.samples.back())) fail("value must be finite");
        }
        if (series.samples.empty()) fail("no samples after header");
        series.run_count = static_cast<int>(series.samples.size());
        return series;
    }

    if (header.size() == 3 && header[0] == "event" && header[1] == "start" &&
        header[2] == "duration") {
        VideoSession session;
        session.label = label;
        bool session_seen = false;
        while (std::getline(in, line)) {
            ++row;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            const auto fields = split(line);
            if (fields.size() != 3) fail("expected 3 columns");
            double start = 0.0, value = 0.0;
            try {
                start = std::stod(fields[1]);
                value = std::stod(fields[2]);
            } catch (const std::exception&) {
                fail("non-numeric field");
            }
            (void)start;
            if (fields[0] == "session") {
                session.total_duration_s = value;
                session_seen = true;
            } else if (fields[0] == "stall") {
                if (value < 0.0) fail("stall duration must be non-negative");
                session.stall_durations_s.push_back(value);
            } else if (fields[0] == "bitrate") {
                session.bitrate_samples_mbps.push_back(value);
            } else {
                fail("unknown event '" + fields[0] + "'");
            }
        }
        if (!session_seen) fail("missing 'session' row with total duration");
        try {
            session.validate();
        } catch (const ConfigError& e) {
            fail(e.what());
        }
        return session;
    }

    fail("unrecognized header; expected 'timestamp,value' or 'event,start,duration'");
    return SampleSeries{};  // unreachable
}

inline IngestResult ingest_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open CSV file: " + path);
    std::string label = path;
    const auto slash = label.find_last_of("/\\");
    if (slash != std::string::npos) label = label.substr(slash + 1);
    const auto dot = label.rfind('.');
    if (dot != std::string::npos) label = label.substr(0, dot);
    return ingest_csv(in, label);
}

struct StatsRow {
    std::string label;
    double mean = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

inline void export_stats_csv(const std::vector<StatsRow>& rows, std::ostream& out) {
    out << "label,mean,ci_lo,ci_hi\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%.9g,%.9g,%.9g", r.label.c_str(), r.mean, r.ci_lo,
                      r.ci_hi);
        out << buf << "\n";
    }
}

}  // namespace ranplan
