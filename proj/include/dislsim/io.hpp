#pragma once

// Curve files ({"nodes": [[x,y,z],...], "closed": true}), CSV artifacts with
// an embedded "# key=value" config echo, and the bundled curve names.
// Floating point is written with 17 significant digits.

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "curve.hpp"
#include "curves.hpp"

namespace dislsim {

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline ClosedCurve read_curve_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open curve file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("malformed curve file " + path + ": " + e.what());
    }
    if (!j.contains("nodes") || !j["nodes"].is_array())
        throw std::invalid_argument("malformed curve file " + path + ": missing nodes array");
    if (j.contains("closed") && !j["closed"].get<bool>())
        throw std::invalid_argument("curve file " + path + ": only closed curves are supported");
    std::vector<Vec3> nodes;
    for (const auto& row : j["nodes"]) {
        if (!row.is_array() || row.size() != 3)
            throw std::invalid_argument("malformed curve file " + path + ": nodes must be [x,y,z]");
        nodes.push_back({row[0].get<double>(), row[1].get<double>(), row[2].get<double>()});
    }
    return ClosedCurve(nodes);
}

inline void write_curve_json(const ClosedCurve& curve, const std::string& path) {
    nlohmann::json j;
    j["closed"] = true;
    j["nodes"] = nlohmann::json::array();
    for (const Vec3& p : curve.nodes()) j["nodes"].push_back({p.x, p.y, p.z});
    std::ofstream out(path);
    if (!out) throw IoError("cannot write curve file: " + path);
    out << j.dump(1) << "\n";
}

/// Builtin curve specs: "circle[:r=..,n=..]", "ellipse[:a=..,b=..,n=..]",
/// "stadium[:straight=..,turn=..,n=..]", "knot[:R=..,r=..,n=..]"; anything
/// else is treated as a path to a curve file.
inline ClosedCurve resolve_curve(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    std::map<std::string, double> kv;
    if (colon != std::string::npos) {
        std::stringstream ss(spec.substr(colon + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("bad curve spec parameter: " + item);
            kv[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
        }
    }
    auto get = [&](const std::string& key, double dflt) {
        auto it = kv.find(key);
        return it == kv.end() ? dflt : it->second;
    };
    if (name == "circle") return make_circle(get("r", 1.0), int(get("n", 96)));
    if (name == "ellipse") return make_ellipse(get("a", 2.0), get("b", 1.0), int(get("n", 96)));
    if (name == "stadium")
        return make_stadium(get("straight", 1.5), get("turn", 1.0), int(get("n", 160)));
    if (name == "knot") return make_torus_knot(get("R", 2.0), get("r", 0.5), int(get("n", 160)));
    return read_curve_json(spec);
}

/// CSV artifact with "# key=value" config echo rows and 17-digit floats.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::pair<std::string, std::string>>& echo,
              const std::vector<std::string>& columns)
        : out_(path) {
        if (!out_) throw IoError("cannot write artifact: " + path);
        for (const auto& [k, v] : echo) out_ << "# " << k << "=" << v << "\n";
        for (size_t i = 0; i < columns.size(); ++i)
            out_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
    }
    void row(const std::vector<double>& values) {
        char buf[32];
        for (size_t i = 0; i < values.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
            out_ << buf << (i + 1 < values.size() ? "," : "\n");
        }
    }

  private:
    std::ofstream out_;
};

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace dislsim
