//
// Copyright 2026 The streamsyn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef STREAMSYN_HARNESS_STREAMS_HPP_
#define STREAMSYN_HARNESS_STREAMS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "streamsyn/engine.hpp"
#include "streamsyn/errors.hpp"

namespace streamsyn::harness {

enum class StreamKind { kUniform, kClustered, kSparseCorner };

struct StreamSpec {
  StreamKind kind = StreamKind::kUniform;
  int dim = 2;
  std::uint64_t seed = 0;
  int clusters = 4;          // clustered
  double spread = 0.05;      // clustered: per-axis standard deviation
  double corner_prob = 0.9;  // sparse-corner: mass at the origin corner
};

// Accepts "uniform", "clustered", "clustered:K:SPREAD", "sparse-corner",
// "sparse-corner:P".
inline StreamSpec parse_stream(std::string_view text, int dim, std::uint64_t seed) {
  StreamSpec s;
  s.dim = dim;
  s.seed = seed;
  std::vector<std::string> parts;
  std::stringstream ss{std::string(text)};
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.empty()) throw ParameterError("empty stream kind");
  try {
    if (parts[0] == "uniform" && parts.size() == 1) {
      s.kind = StreamKind::kUniform;
    } else if (parts[0] == "clustered" && (parts.size() == 1 || parts.size() == 3)) {
      s.kind = StreamKind::kClustered;
      if (parts.size() == 3) {
        s.clusters = std::stoi(parts[1]);
        s.spread = std::stod(parts[2]);
      }
      if (s.clusters < 1 || !(s.spread >= 0.0)) throw ParameterError("bad clustered parameters");
    } else if (parts[0] == "sparse-corner" && parts.size() <= 2) {
      s.kind = StreamKind::kSparseCorner;
      if (parts.size() == 2) s.corner_prob = std::stod(parts[1]);
      if (!(s.corner_prob >= 0.0 && s.corner_prob <= 1.0)) {
        throw ParameterError("sparse-corner probability must lie in [0,1]");
      }
    } else {
      throw ParameterError("unknown stream kind '" + std::string(text) + "'");
    }
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const ParameterError*>(&e)) throw;
    throw ParameterError("bad stream parameters in '" + std::string(text) + "'");
  }
  return s;
}

inline std::string to_string(const StreamSpec& s) {
  switch (s.kind) {
    case StreamKind::kUniform: return "uniform";
    case StreamKind::kClustered:
      return "clustered:" + std::to_string(s.clusters) + ":" + std::to_string(s.spread);
    case StreamKind::kSparseCorner: return "sparse-corner:" + std::to_string(s.corner_prob);
  }
  return "?";
}

// Reproducible synthetic point source. Values are built from raw 64-bit
// words so the sequence does not depend on the standard library's
// distribution implementations.
class PointGenerator {
 public:
  explicit PointGenerator(const StreamSpec& spec) : spec_(spec), gen_(spec.seed) {
    if (spec.dim < 1) throw ParameterError("stream dimension must be >= 1");
    if (spec_.kind == StreamKind::kClustered) {
      centers_.resize(static_cast<std::size_t>(spec_.clusters * spec_.dim));
      for (auto& c : centers_) c = 0.1 + 0.8 * unit();
    }
  }

  const StreamSpec& spec() const { return spec_; }

  std::vector<double> next() {
    std::vector<double> x(static_cast<std::size_t>(spec_.dim));
    switch (spec_.kind) {
      case StreamKind::kUniform:
        for (auto& v : x) v = unit();
        break;
      case StreamKind::kClustered: {
        const auto k = static_cast<std::size_t>(gen_() % static_cast<std::uint64_t>(spec_.clusters));
        for (std::size_t a = 0; a < x.size(); ++a) {
          const double v = centers_[k * x.size() + a] + spec_.spread * normal();
          x[a] = std::clamp(v, 0.0, 1.0);
        }
        break;
      }
      case StreamKind::kSparseCorner: {
        const bool corner = unit() < spec_.corner_prob;
        for (auto& v : x) v = corner ? 0.0625 * unit() : unit();
        break;
      }
    }
    return x;
  }

  PointSet take(std::size_t n) {
    PointSet out(spec_.dim);
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(next());
    return out;
  }

 private:
  double unit() { return static_cast<double>(gen_() >> 11) * 0x1p-53; }
  double normal() {
    if (spare_) {
      const double z = *spare_;
      spare_.reset();
      return z;
    }
    const double u1 = (static_cast<double>(gen_() >> 11) + 0.5) * 0x1p-53;
    const double u2 = unit();
    const double rho = std::sqrt(-2.0 * std::log(u1));
    constexpr double kTwoPi = 6.283185307179586476925;
    spare_ = rho * std::sin(kTwoPi * u2);
    return rho * std::cos(kTwoPi * u2);
  }

  StreamSpec spec_;
  std::mt19937_64 gen_;
  std::vector<double> centers_;
  std::optional<double> spare_;
};

enum class InputFormat { kJsonl, kCsv };

inline InputFormat parse_format(std::string_view s) {
  if (s == "jsonl") return InputFormat::kJsonl;
  if (s == "csv") return InputFormat::kCsv;
  throw ParameterError("unknown input format '" + std::string(s) + "'");
}

// Parses one record: JSONL {"x":[...]} or a CSV row of d numbers. Throws
// ParseError on malformed text or a point outside [0,1]^dim.
inline std::vector<double> parse_record(const std::string& text, InputFormat fmt, int dim,
                                        std::size_t line) {
  std::vector<double> x;
  if (fmt == InputFormat::kJsonl) {
    const auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("x") || !j["x"].is_array()) {
      throw ParseError(line, "expected a JSON object {\"x\": [...]}");
    }
    for (const auto& v : j["x"]) {
      if (!v.is_number()) throw ParseError(line, "non-numeric coordinate");
      x.push_back(v.get<double>());
    }
  } else {
    std::stringstream ss(text);
    for (std::string cell; std::getline(ss, cell, ',');) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw ParseError(line, "non-numeric field '" + cell + "'");
      }
      if (cell.find_first_not_of(" \t\r", used) != std::string::npos) {
        throw ParseError(line, "non-numeric field '" + cell + "'");
      }
      x.push_back(v);
    }
  }
  try {
    check_point(x, dim);
  } catch (const DomainError& e) {
    throw ParseError(line, e.what());
  }
  return x;
}

// Line reader that skips blank lines and keeps line numbers.
class RecordReader {
 public:
  RecordReader(std::istream& in, InputFormat fmt, int dim) : in_(in), fmt_(fmt), dim_(dim) {}

  std::optional<std::vector<double>> next() {
    std::string text;
    while (std::getline(in_, text)) {
      ++line_;
      if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
      return parse_record(text, fmt_, dim_, line_);
    }
    return std::nullopt;
  }

  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  InputFormat fmt_;
  int dim_;
  std::size_t line_ = 0;
};

inline PointSet read_points(std::istream& in, InputFormat fmt, int dim) {
  RecordReader reader(in, fmt, dim);
  PointSet out(dim);
  while (auto x = reader.next()) out.push_back(*x);
  return out;
}

// Boolean stream: one 0/1 per line (blank lines skipped).
inline std::vector<bool> read_bits(std::istream& in) {
  std::vector<bool> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    const auto b = text.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = text.find_last_not_of(" \t\r");
    const std::string tok = text.substr(b, e - b + 1);
    if (tok == "0") out.push_back(false);
    else if (tok == "1") out.push_back(true);
    else throw ParseError(line, "expected 0 or 1, got '" + tok + "'");
  }
  return out;
}

}  // namespace streamsyn::harness

#endif  // STREAMSYN_HARNESS_STREAMS_HPP_
