#pragma once

// Deterministic file emission: CSV at 17 significant digits, a minimal JSON
// writer (insertion-ordered keys, round-trip-exact doubles), SVG polylines,
// and an FNV-1a content manifest. Byte-identical reruns are a contract.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "curveflow/core.hpp"

namespace curveflow {

inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// --- tiny write-only JSON ---------------------------------------------------

class JsonValue {
 public:
  static JsonValue object() { return JsonValue(Kind::object); }
  static JsonValue array() { return JsonValue(Kind::array); }
  static JsonValue str(std::string s) {
    JsonValue v(Kind::string);
    v.text_ = std::move(s);
    return v;
  }
  static JsonValue num(double x) {
    JsonValue v(Kind::number);
    v.text_ = std::isfinite(x) ? format_double(x) : "null";
    return v;
  }
  static JsonValue integer(long long n) {
    JsonValue v(Kind::number);
    v.text_ = std::to_string(n);
    return v;
  }
  static JsonValue boolean(bool b) {
    JsonValue v(Kind::number);
    v.text_ = b ? "true" : "false";
    return v;
  }

  JsonValue& set(const std::string& key, JsonValue value) {
    members_.emplace_back(key, std::move(value));
    return *this;
  }
  JsonValue& push(JsonValue value) {
    members_.emplace_back(std::string(), std::move(value));
    return *this;
  }

  void dump(std::string& out, int indent = 0) const {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string pad2(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (kind_) {
      case Kind::object: {
        if (members_.empty()) {
          out += "{}";
          return;
        }
        out += "{\n";
        for (std::size_t i = 0; i < members_.size(); ++i) {
          out += pad2 + '"' + escape(members_[i].first) + "\": ";
          members_[i].second.dump(out, indent + 1);
          out += (i + 1 < members_.size()) ? ",\n" : "\n";
        }
        out += pad + "}";
        break;
      }
      case Kind::array: {
        if (members_.empty()) {
          out += "[]";
          return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < members_.size(); ++i) {
          out += pad2;
          members_[i].second.dump(out, indent + 1);
          out += (i + 1 < members_.size()) ? ",\n" : "\n";
        }
        out += pad + "]";
        break;
      }
      case Kind::string:
        out += '"' + escape(text_) + '"';
        break;
      case Kind::number:
        out += text_;
        break;
    }
  }

  std::string dump() const {
    std::string out;
    dump(out, 0);
    out += "\n";
    return out;
  }

 private:
  enum class Kind { object, array, string, number };
  explicit JsonValue(Kind k) : kind_(k) {}

  static std::string escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
      switch (ch) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default: out += ch;
      }
    }
    return out;
  }

  Kind kind_;
  std::string text_;
  std::vector<std::pair<std::string, JsonValue>> members_;
};

// --- manifest ----------------------------------------------------------------

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

class RunWriter {
 public:
  explicit RunWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  const std::filesystem::path& dir() const { return dir_; }

  void emit(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    char hex[20];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(content)));
    entries_.emplace_back(name, content.size(), std::string("fnv1a64:") + hex);
  }

  // every emitted file, with content hash; written last
  void write_manifest() {
    JsonValue files = JsonValue::array();
    for (const auto& [name, bytes, hash] : entries_) {
      JsonValue entry = JsonValue::object();
      entry.set("name", JsonValue::str(name));
      entry.set("bytes", JsonValue::integer(static_cast<long long>(bytes)));
      entry.set("hash", JsonValue::str(hash));
      files.push(std::move(entry));
    }
    JsonValue root = JsonValue::object();
    root.set("files", std::move(files));
    const std::string content = root.dump();
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::tuple<std::string, std::size_t, std::string>> entries_;
};

// --- CSV ----------------------------------------------------------------------

inline std::string profile_csv(const PeriodicProfile& v) {
  std::string out = "x,value\n";
  for (int i = 0; i < v.size(); ++i) {
    out += format_double(v.x(i));
    out += ',';
    out += format_double(v.values[static_cast<std::size_t>(i)]);
    out += '\n';
  }
  return out;
}

inline std::string series_csv(const std::string& header,
                              const std::vector<std::vector<double>>& rows) {
  std::string out = header + "\n";
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += format_double(row[j]);
    }
    out += '\n';
  }
  return out;
}

inline PeriodicProfile read_profile_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,value", 0) != 0)
    throw std::runtime_error("profile CSV must start with header 'x,value'");
  std::vector<double> xs, vs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("malformed profile CSV row");
    xs.push_back(std::stod(line.substr(0, comma)));
    vs.push_back(std::stod(line.substr(comma + 1)));
  }
  const int n = static_cast<int>(vs.size());
  if (n < 16 || n % 2 != 0) throw std::runtime_error("profile CSV needs an even count >= 16");
  const int m = static_cast<int>(std::lround(-xs.front() / kPi));
  if (m < 1) throw std::runtime_error("profile CSV first abscissa must be -m*pi");
  const double dx = 2.0 * m * kPi / n;
  for (int i = 0; i < n; ++i)
    if (std::fabs(xs[static_cast<std::size_t>(i)] - (-m * kPi + i * dx)) > 1e-9)
      throw std::runtime_error("profile CSV abscissae are not the uniform grid");
  return PeriodicProfile(m, std::move(vs));
}

// --- SVG ------------------------------------------------------------------------

// Fixed 800x800 viewport, polyline auto-scaled with a 5% margin, stroke 1.
inline std::string curve_svg(const std::vector<std::array<double, 2>>& points) {
  if (points.empty()) throw std::invalid_argument("curve_svg: empty polyline");
  double xlo = points[0][0], xhi = xlo, ylo = points[0][1], yhi = ylo;
  for (const auto& p : points) {
    xlo = std::min(xlo, p[0]);
    xhi = std::max(xhi, p[0]);
    ylo = std::min(ylo, p[1]);
    yhi = std::max(yhi, p[1]);
  }
  const double span = std::max({xhi - xlo, yhi - ylo, 1e-12});
  const double view = 800.0, margin = 0.05 * view;
  const double scale = (view - 2.0 * margin) / span;
  const double cx = 0.5 * (xlo + xhi), cy = 0.5 * (ylo + yhi);

  std::string out =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" "
      "viewBox=\"0 0 800 800\">\n<polyline fill=\"none\" stroke=\"black\" "
      "stroke-width=\"1\" points=\"";
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i) out += ' ';
    const double px = 0.5 * view + (points[i][0] - cx) * scale;
    const double py = 0.5 * view - (points[i][1] - cy) * scale;  // y up
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f,%.3f", px, py);
    out += buf;
  }
  out += "\"/>\n</svg>\n";
  return out;
}

}  // namespace curveflow
