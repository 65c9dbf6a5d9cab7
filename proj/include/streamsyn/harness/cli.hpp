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

#ifndef STREAMSYN_HARNESS_CLI_HPP_
#define STREAMSYN_HARNESS_CLI_HPP_

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "streamsyn/engine.hpp"
#include "streamsyn/errors.hpp"
#include "streamsyn/harness/audit.hpp"
#include "streamsyn/harness/bench.hpp"
#include "streamsyn/harness/count.hpp"
#include "streamsyn/harness/perf.hpp"
#include "streamsyn/harness/streams.hpp"

namespace streamsyn::harness {

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitValidation = 3, kExitInternal = 4 };

namespace cli_internal {

struct Io {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

// "-" selects the process stream.
class InputFile {
 public:
  InputFile(const std::string& path, std::istream& fallback) : stream_(&fallback) {
    if (path == "-") return;
    file_ = std::make_unique<std::ifstream>(path);
    if (!*file_) throw ValidationError("cannot open input '" + path + "'");
    stream_ = file_.get();
  }
  std::istream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ifstream> file_;
  std::istream* stream_;
};

class OutputFile {
 public:
  OutputFile(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (path == "-") return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw ValidationError("cannot open output '" + path + "'");
    stream_ = file_.get();
  }
  std::ostream& get() { return *stream_; }
  bool is_stdout() const { return file_ == nullptr; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

struct EngineFlags {
  int dim = 2;
  double epsilon = 1.0;
  std::string mode;
  std::uint64_t seed = 0;
  bool noise_off = false;

  void add(CLI::App& app) {
    app.add_option("--dim", dim, "dimension d of [0,1]^d")->check(CLI::Range(1, 62));
    app.add_option("--epsilon", epsilon, "privacy budget")->check(CLI::PositiveNumber);
    app.add_option("--mode", mode, "inhom-sparse | replay-hybrid (default by dimension)")
        ->check(CLI::IsMember({"inhom-sparse", "replay-hybrid"}));
    app.add_option("--seed", seed, "RNG seed")->envname("STREAMSYN_SEED");
    app.add_flag("--noise-off", noise_off, "force every noise draw to 0 (testing only)");
  }

  EngineConfig config() const {
    EngineConfig c;
    c.dim = dim;
    c.epsilon = epsilon;
    if (!mode.empty()) c.mode = parse_mode(mode);
    c.seed = seed;
    c.noise_enabled = !noise_off;
    return c;
  }
};

inline void write_points(std::ostream& out, const SyntheticDataset& s) {
  nlohmann::json pts = nlohmann::json::array();
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    const auto p = s.points[i];
    pts.push_back(std::vector<double>(p.begin(), p.end()));
  }
  out << nlohmann::json{{"t", s.time}, {"points", std::move(pts)}}.dump() << '\n';
}

inline void write_counts(std::ostream& out, std::uint64_t t, int depth,
                         const std::vector<std::int64_t>& m) {
  out << nlohmann::json{{"t", t},
                        {"depth", depth},
                        {"counts", std::vector<std::int64_t>(m.begin() + 1, m.end())}}
             .dump()
      << '\n';
}

}  // namespace cli_internal

// Entry point shared by the streamsyn binary and the tests. Returns the
// process exit code.
inline int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out,
                   std::ostream& err) {
  using namespace cli_internal;
  Io io{in, out, err};
  CLI::App app{"Online differentially private synthetic data for streams in [0,1]^d"};
  app.require_subcommand(1);

  // run
  EngineFlags run_engine;
  std::string run_input = "-", run_output = "-", run_format = "jsonl";
  std::uint64_t emit_every = 1;
  bool counts_only = false;
  CLI::App* run = app.add_subcommand("run", "release a synthetic dataset while reading a stream");
  run_engine.add(*run);
  run->add_option("--input", run_input, "JSONL/CSV points, '-' for stdin");
  run->add_option("--output", run_output, "'-' for stdout");
  run->add_option("--emit-every", emit_every, "release every k steps")->check(CLI::PositiveNumber);
  run->add_option("--format", run_format, "input format")->check(CLI::IsMember({"jsonl", "csv"}));
  run->add_flag("--counts-only", counts_only, "write consistent counts instead of points");

  // bench
  EngineFlags bench_engine;
  BenchConfig bench_cfg;
  std::string bench_stream = "uniform", bench_output = "-";
  CLI::App* bench = app.add_subcommand("bench", "accuracy experiment over power-of-two checkpoints");
  bench_engine.add(*bench);
  bench->add_option("--trials", bench_cfg.trials)->check(CLI::PositiveNumber);
  bench->add_option("--tmax", bench_cfg.tmax, "largest checkpoint (power of two)");
  bench->add_option("--fit-from", bench_cfg.fit_from, "first checkpoint in the slope fit");
  bench->add_option("--exact-cap", bench_cfg.exact_cap, "largest t with exact W1 (d >= 2)");
  bench->add_option("--threads", bench_cfg.threads)->check(CLI::PositiveNumber);
  bench->add_option("--stream", bench_stream,
                    "uniform | clustered[:K:SPREAD] | sparse-corner[:P]");
  bench->add_option("--output", bench_output, "CSV destination, '-' for stdout");

  // audit
  EngineFlags audit_engine;
  std::string audit_a, audit_b, audit_format = "jsonl", audit_stream = "uniform";
  std::uint64_t audit_length = 64, audit_tdiff = 0;
  CLI::App* audit = app.add_subcommand("audit", "compare counter inputs on neighboring streams");
  audit_engine.add(*audit);
  audit->add_option("--input-a", audit_a, "first stream (file)");
  audit->add_option("--input-b", audit_b, "second stream (file)");
  audit->add_option("--format", audit_format)->check(CLI::IsMember({"jsonl", "csv"}));
  audit->add_option("--t-diff", audit_tdiff, "1-based differing position");
  audit->add_option("--length", audit_length, "generated stream length");
  audit->add_option("--stream", audit_stream, "generated stream kind");

  // count
  CountConfig count_cfg;
  std::string count_mech = "hybrid", count_input = "-";
  bool count_oracle = false, count_per_step = false, count_accumulate = false;
  std::uint64_t count_length = 0;
  double count_rate = 0.5;
  CLI::App* count = app.add_subcommand("count", "run one private counter on a 0/1 stream");
  count->add_option("--mechanism", count_mech)
      ->check(CLI::IsMember({"binary", "hybrid", "sparse", "inhom"}));
  count->add_option("--epsilon", count_cfg.epsilon)->check(CLI::PositiveNumber);
  count->add_option("--horizon", count_cfg.horizon, "binary/sparse horizon (default: length)");
  count->add_option("--start-level", count_cfg.start_level, "inhom r0")->check(CLI::Range(0, 62));
  count->add_option("--alpha", count_cfg.alpha, "inhom level decay")->check(CLI::PositiveNumber);
  count->add_option("--seed", count_cfg.seed)->envname("STREAMSYN_SEED");
  count->add_flag("--noise-off", [&](std::int64_t) { count_cfg.noise_enabled = false; });
  count->add_flag("--oracle", count_oracle, "also write the true count s_t");
  count->add_flag("--per-step-checks", count_per_step, "sparse: one comparison draw per step");
  count->add_flag("--accumulate", count_accumulate, "sparse: accumulate subroutine outputs");
  count->add_option("--input", count_input, "0/1 per line, '-' for stdin");
  count->add_option("--length", count_length, "generate a Bernoulli stream instead");
  count->add_option("--rate", count_rate, "Bernoulli rate")->check(CLI::Range(0.0, 1.0));

  // perf
  PerfConfig perf_cfg;
  CLI::App* perf = app.add_subcommand("perf", "cumulative running time at doubling t");
  perf->add_option("--dim", perf_cfg.dims, "one or more dimensions")->delimiter(',');
  perf->add_option("--tmin", perf_cfg.tmin);
  perf->add_option("--tmax", perf_cfg.tmax);
  perf->add_option("--repeats", perf_cfg.repeats)->check(CLI::PositiveNumber);
  perf->add_option("--epsilon", perf_cfg.epsilon)->check(CLI::PositiveNumber);
  perf->add_option("--seed", perf_cfg.seed)->envname("STREAMSYN_SEED");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    app.exit(e, io.out, io.err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, io.out, io.err);
    return kExitUsage;
  }

  try {
    if (*run) {
      const EngineConfig cfg = run_engine.config();
      Engine engine(cfg);
      InputFile input(run_input, io.in);
      OutputFile output(run_output, io.out);
      RecordReader reader(input.get(), parse_format(run_format), cfg.dim);
      while (auto x = reader.next()) {
        engine.ingest(*x);
        if (engine.time() % emit_every != 0) continue;
        if (counts_only) {
          write_counts(output.get(), engine.time(), engine.depth(), engine.consistent_counts());
        } else {
          write_points(output.get(), engine.synthetic());
        }
      }
      return kExitOk;
    }
    if (*bench) {
      bench_cfg.engine = bench_engine.config();
      bench_cfg.stream = parse_stream(bench_stream, bench_cfg.engine.dim, bench_engine.seed);
      Engine probe(bench_cfg.engine);  // validates the engine configuration up front
      const BenchReport report = run_bench(bench_cfg);
      OutputFile output(bench_output, io.out);
      write_csv(output.get(), report);
      write_summary(output.get(), report);
      if (!output.is_stdout()) write_summary(io.out, report);
      return kExitOk;
    }
    if (*audit) {
      const EngineConfig cfg = audit_engine.config();
      PointSet a(cfg.dim), b(cfg.dim);
      if (!audit_a.empty() || !audit_b.empty()) {
        if (audit_a.empty() || audit_b.empty()) {
          throw ParameterError("audit: --input-a and --input-b go together");
        }
        InputFile fa(audit_a, io.in), fb(audit_b, io.in);
        a = read_points(fa.get(), parse_format(audit_format), cfg.dim);
        b = read_points(fb.get(), parse_format(audit_format), cfg.dim);
      } else {
        if (audit_tdiff == 0 || audit_tdiff > audit_length) {
          throw ParameterError("audit: --t-diff must lie in [1, --length]");
        }
        PointGenerator gen(parse_stream(audit_stream, cfg.dim, cfg.seed));
        a = gen.take(audit_length);
        const std::vector<double> other = gen.next();
        for (std::size_t i = 0; i < a.size(); ++i) {
          if (i + 1 == audit_tdiff) {
            b.push_back(other);
          } else {
            b.push_back(a[i]);
          }
        }
      }
      const AuditReport rep = run_audit(cfg, a, b);
      if (audit_tdiff != 0 && rep.t_diff != audit_tdiff) {
        throw ValidationError("audit: streams differ at position " + std::to_string(rep.t_diff) +
                              ", not at --t-diff " + std::to_string(audit_tdiff));
      }
      write_audit(io.out, rep);
      return rep.ok() ? kExitOk : kExitValidation;
    }
    if (*count) {
      count_cfg.mechanism = parse_mechanism(count_mech);
      if (count_per_step) count_cfg.sparse.checks = SegmentChecks::kPerStep;
      if (count_accumulate) count_cfg.sparse.update = CarryUpdate::kAccumulate;
      std::vector<bool> bits;
      if (count_length > 0) {
        std::mt19937_64 gen(count_cfg.seed ^ 0x5bd1e995u);
        for (std::uint64_t i = 0; i < count_length; ++i) {
          bits.push_back(static_cast<double>(gen() >> 11) * 0x1p-53 < count_rate);
        }
      } else {
        InputFile input(count_input, io.in);
        bits = read_bits(input.get());
      }
      write_count_csv(io.out, run_count(count_cfg, bits), count_oracle);
      return kExitOk;
    }
    if (*perf) {
      const PerfReport rep = run_perf(perf_cfg);
      write_perf_csv(io.out, rep);
      io.out << "# max_doubling_ratio_limit=" << perf_cfg.max_doubling_ratio
             << " ok=" << (rep.doubling_ok() ? "yes" : "no") << "\n";
      return rep.doubling_ok() ? kExitOk : kExitValidation;
    }
  } catch (const ParameterError& e) {
    io.err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    io.err << "input error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DomainError& e) {
    io.err << "input error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    io.err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    io.err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace streamsyn::harness

#endif  // STREAMSYN_HARNESS_CLI_HPP_
