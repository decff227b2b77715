/*
 * Copyright 2026 The pw2v Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <charconv>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pw2v/config.hpp"
#include "pw2v/distributed.hpp"
#include "pw2v/error.hpp"
#include "pw2v/eval.hpp"
#include "pw2v/model_io.hpp"
#include "pw2v/report.hpp"
#include "pw2v/socket_transport.hpp"
#include "pw2v/sync.hpp"
#include "pw2v/trainer.hpp"
#include "pw2v/transport.hpp"
#include "pw2v/vocab.hpp"

namespace pw2v::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

inline constexpr const char* kPrecisionEnv = "PW2V_PRECISION";

inline constexpr std::string_view kUsage =
    "usage: pw2v <command> [flags]\n"
    "\n"
    "commands:\n"
    "  train       -train <corpus> -output <file> [training flags]\n"
    "  train-dist  training flags plus -inprocess N | -nodes N -rank R -hosts <file>\n"
    "              [-sync-period W] [-hot-rows F] [-rotation R]\n"
    "  eval        -model <file> [-similarity <file>] [-analogy <file>] [-max-vocab M]\n"
    "  vocab       -train <corpus> -output <file> [-min-count 5]\n"
    "\n"
    "training flags:\n"
    "  -size 300 -window 5 -negative 5 -sample 1e-4 -min-count 5 -alpha 0.025\n"
    "  -iter 5 -threads 1 -batch-size 16 -kernel scalar|batched -binary 0|1\n"
    "  -seed 1 -report <file> -debug 0|1 -gemm naive|blocked|blas\n"
    "  -exact-sigmoid 0|1 -shrink-window 0|1 -distinct-negatives 0|1\n"
    "  -table-size L -similarity <file> -analogy <file> -max-vocab M\n"
    "\n"
    "PW2V_PRECISION=double trains in 64-bit arithmetic.\n";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Single-dash "-name value" flags, each given at most once.
class Flags {
 public:
  Flags(std::span<const std::string> args, const std::set<std::string, std::less<>>& allowed) {
    for (std::size_t i = 0; i < args.size(); ++i) {
      const std::string& a = args[i];
      if (a.size() < 2 || a[0] != '-') throw UsageError("unexpected argument '" + a + "'");
      const std::string name = a.substr(a[1] == '-' ? 2 : 1);
      if (!allowed.contains(name)) throw UsageError("unknown flag '" + a + "'");
      if (i + 1 >= args.size()) throw UsageError("flag '" + a + "' needs a value");
      if (!values_.emplace(name, args[++i]).second)
        throw UsageError("flag '" + a + "' given twice");
    }
  }

  bool has(std::string_view name) const { return values_.find(name) != values_.end(); }

  std::string str(std::string_view name, std::string fallback = {}) const {
    const auto it = values_.find(name);
    return it == values_.end() ? fallback : it->second;
  }

  std::string required(std::string_view name) const {
    const auto it = values_.find(name);
    if (it == values_.end()) throw UsageError("missing required flag -" + std::string(name));
    return it->second;
  }

  template <typename T>
  T num(std::string_view name, T fallback) const {
    const auto it = values_.find(name);
    if (it == values_.end()) return fallback;
    const std::string& s = it->second;
    T v{};
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw UsageError("bad value '" + s + "' for -" + std::string(name));
    return v;
  }

  bool flag(std::string_view name, bool fallback) const {
    const auto it = values_.find(name);
    if (it == values_.end()) return fallback;
    if (it->second == "0") return false;
    if (it->second == "1") return true;
    throw UsageError("-" + std::string(name) + " takes 0 or 1");
  }

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

inline const std::set<std::string, std::less<>>& training_flags() {
  static const std::set<std::string, std::less<>> s{
      "train",      "output",         "size",          "window",
      "negative",   "sample",         "min-count",     "alpha",
      "iter",       "threads",        "batch-size",    "kernel",
      "binary",     "seed",           "report",        "debug",
      "gemm",       "exact-sigmoid",  "shrink-window", "distinct-negatives",
      "table-size", "similarity",     "analogy",       "max-vocab"};
  return s;
}

enum class Precision { kFloat, kDouble };

inline Precision precision_from_env() {
  const char* v = std::getenv(kPrecisionEnv);
  if (!v || !*v) return Precision::kFloat;
  const std::string_view s(v);
  if (s == "double" || s == "64") return Precision::kDouble;
  if (s == "float" || s == "32") return Precision::kFloat;
  throw UsageError(std::string(kPrecisionEnv) + " must be float or double");
}

inline TrainingConfig config_from_flags(const Flags& f, Precision precision) {
  TrainingConfig c;
  c.dim = f.num("size", c.dim);
  c.window = f.num("window", c.window);
  c.negative = f.num("negative", c.negative);
  c.sample = f.num("sample", c.sample);
  c.min_count = f.num("min-count", c.min_count);
  c.alpha0 = f.num("alpha", c.alpha0);
  c.epochs = f.num("iter", c.epochs);
  c.threads = f.num("threads", c.threads);
  c.batch_cap = f.num("batch-size", c.batch_cap);
  if (f.has("kernel")) c.kernel = parse_kernel_kind(f.str("kernel"));
  c.seed = f.num("seed", c.seed);
  c.progress = f.num("debug", 1) > 0;
  c.gemm = precision == Precision::kDouble ? GemmBackend::kNaive : GemmBackend::kBlocked;
  if (f.has("gemm")) c.gemm = parse_gemm_backend(f.str("gemm"));
  c.exact_sigmoid = f.flag("exact-sigmoid", c.exact_sigmoid);
  c.shrink_window = f.flag("shrink-window", c.shrink_window);
  c.distinct_negatives = f.flag("distinct-negatives", c.distinct_negatives);
  c.table_length = f.num("table-size", c.table_length);
  c.validate();
  return c;
}

inline SyncPolicy policy_from_flags(const Flags& f, std::size_t vocab_size) {
  SyncPolicy p = SyncPolicy::defaults(vocab_size);
  p.period_words = f.num("sync-period", p.period_words);
  p.hot_rows = f.num("hot-rows", p.hot_rows);
  if (f.has("hot-rows") && !f.has("rotation"))
    p.rotation_chunk = vocab_size > p.hot_rows ? (vocab_size - p.hot_rows + 19) / 20 : 0;
  p.rotation_chunk = f.num("rotation", p.rotation_chunk);
  p.validate(vocab_size);
  return p;
}

/// Evaluates and records scores for whichever test sets the flags name.
inline void evaluate_into(RunReport& r, const WordVectors& wv, const Flags& f, std::ostream* out) {
  const std::size_t max_vocab = f.num<std::size_t>("max-vocab", 0);
  if (f.has("similarity")) {
    const auto s = eval_similarity(wv, std::filesystem::path(f.str("similarity")));
    r.set("similarity_score", s.score);
    r.set("similarity_pairs_used", s.used);
    r.set("similarity_pairs_skipped", s.skipped);
  }
  if (f.has("analogy")) {
    const auto a = eval_analogy(wv, std::filesystem::path(f.str("analogy")), max_vocab);
    r.set("analogy_accuracy", a.accuracy);
    r.set("analogy_correct", a.correct);
    r.set("analogy_answered", a.answered);
    r.set("analogy_skipped", a.skipped);
    if (out)
      for (const auto& s : a.sections)
        r.set("analogy_section." + s.name,
              RunReport::format_double(s.accuracy()) + " (" + std::to_string(s.correct) + "/" +
                  std::to_string(s.answered) + ", skipped " + std::to_string(s.skipped) + ")");
  }
}

inline VectorFormat output_format(const Flags& f) {
  return f.flag("binary", false) ? VectorFormat::kBinary : VectorFormat::kText;
}

template <typename Real>
int finish_training(const Flags& f, const Vocabulary& vocab, const EmbeddingModel<Real>& model,
                    RunReport& r, std::ostream& out) {
  const std::filesystem::path output = f.required("output");
  save_model(model, vocab, output, output_format(f));
  r.set("output", output.string());
  if (f.has("similarity") || f.has("analogy"))
    evaluate_into(r, WordVectors::from_model(vocab, model), f, nullptr);
  if (f.has("report")) r.save(f.str("report"));
  r.write(out);
  return kExitOk;
}

template <typename Real>
int train_command(const Flags& f, Precision precision, std::ostream& out) {
  const TrainingConfig config = config_from_flags(f, precision);
  const std::filesystem::path corpus_path = f.required("train");
  f.required("output");
  auto corpus = prepare_corpus(corpus_path, config);
  auto result = train<Real>(corpus, config);

  RunReport r;
  r.set("command", "train");
  r.set("corpus", corpus_path.string());
  r.set("precision", precision == Precision::kDouble ? "double" : "float");
  report_config(r, config);
  r.set("vocab_size", result.vocab.size());
  report_stats(r, result.stats);
  report_host(r);
  return finish_training(f, result.vocab, result.model, r, out);
}

template <typename Real>
int train_dist_command(const Flags& f, Precision precision, std::ostream& out) {
  const TrainingConfig config = config_from_flags(f, precision);
  const std::filesystem::path corpus_path = f.required("train");
  const bool inprocess = f.has("inprocess");
  if (inprocess == f.has("nodes"))
    throw UsageError("train-dist needs exactly one of -inprocess N or -nodes N");
  auto corpus = prepare_corpus(corpus_path, config);
  const SyncPolicy policy = policy_from_flags(f, corpus->vocab.size());

  std::optional<DistributedResult<Real>> result;
  std::string transport_name;
  if (inprocess) {
    const auto nodes = f.num<std::size_t>("inprocess", 1);
    if (nodes < 1) throw UsageError("-inprocess must be >= 1");
    f.required("output");
    result = train_in_process<Real>(corpus, config, policy, nodes);
    transport_name = "inprocess";
  } else {
    const auto nodes = f.num<std::size_t>("nodes", 1);
    const auto rank = f.num<std::size_t>("rank", 0);
    if (!f.has("rank")) throw UsageError("missing required flag -rank");
    const auto hosts = read_hosts_file(f.required("hosts"));
    if (hosts.size() != nodes)
      throw UsageError("hosts file lists " + std::to_string(hosts.size()) +
                       " endpoints for -nodes " + std::to_string(nodes));
    if (rank == 0) f.required("output");
    SocketTransport<Real> transport(rank, nodes, hosts[0]);
    result = distributed_train<Real>(corpus, config, policy, transport);
    transport_name = "socket";
  }

  RunReport r;
  r.set("command", "train-dist");
  r.set("corpus", corpus_path.string());
  r.set("precision", precision == Precision::kDouble ? "double" : "float");
  r.set("transport", transport_name);
  r.set("nodes", result->nodes);
  r.set("rank", result->rank);
  report_config(r, config);
  r.set("sync_period", policy.period_words);
  r.set("hot_rows", policy.hot_rows);
  r.set("rotation", policy.rotation_chunk);
  r.set("sync_periods", result->periods);
  r.set("vocab_size", corpus->vocab.size());
  report_stats(r, result->stats);
  report_host(r);
  if (result->rank != 0) {
    r.write(out);
    return kExitOk;
  }
  return finish_training(f, corpus->vocab, result->model, r, out);
}

inline int eval_command(const Flags& f, std::ostream& out) {
  const std::filesystem::path model_path = f.required("model");
  if (!f.has("similarity") && !f.has("analogy"))
    throw UsageError("eval needs -similarity and/or -analogy");
  VectorFormat fmt = VectorFormat::kAuto;
  if (f.has("format")) {
    const std::string s = f.str("format");
    if (s == "text") fmt = VectorFormat::kText;
    else if (s == "binary") fmt = VectorFormat::kBinary;
    else if (s != "auto") throw UsageError("-format takes text, binary or auto");
  }
  const WordVectors wv = load_model(model_path, fmt);
  RunReport r;
  r.set("command", "eval");
  r.set("model", model_path.string());
  r.set("vocab_size", wv.size());
  r.set("size", wv.dim());
  if (f.has("max-vocab")) r.set("max_vocab", f.num<std::size_t>("max-vocab", 0));
  evaluate_into(r, wv, f, &out);
  r.write(out);
  return kExitOk;
}

inline int vocab_command(const Flags& f, std::ostream& out) {
  const std::filesystem::path corpus_path = f.required("train");
  const std::filesystem::path output = f.required("output");
  const auto min_count = f.num<std::uint64_t>("min-count", 5);
  if (min_count < 1) throw UsageError("-min-count must be >= 1");
  const Vocabulary vocab = learn_vocab(corpus_path, min_count);
  save_vocab(vocab, output);
  RunReport r;
  r.set("command", "vocab");
  r.set("corpus", corpus_path.string());
  r.set("vocab_size", vocab.size());
  r.set("total_tokens", vocab.total_tokens());
  r.set("output", output.string());
  r.write(out);
  return kExitOk;
}

/// Entry point; `args` excludes the program name.
inline int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  try {
    if (args.empty()) throw UsageError("missing command");
    const std::string& cmd = args[0];
    const auto rest = args.subspan(1);
    if (cmd == "-h" || cmd == "--help" || cmd == "help") {
      out << kUsage;
      return kExitOk;
    }
    if (cmd == "train" || cmd == "train-dist") {
      auto allowed = training_flags();
      if (cmd == "train-dist")
        allowed.insert({"inprocess", "nodes", "rank", "hosts", "sync-period", "hot-rows",
                        "rotation"});
      const Flags f(rest, allowed);
      if (!f.has("train")) throw UsageError("missing required flag -train");
      const Precision p = precision_from_env();
      if (cmd == "train")
        return p == Precision::kDouble ? train_command<double>(f, p, out)
                                       : train_command<float>(f, p, out);
      return p == Precision::kDouble ? train_dist_command<double>(f, p, out)
                                     : train_dist_command<float>(f, p, out);
    }
    if (cmd == "eval")
      return eval_command(Flags(rest, {"model", "format", "similarity", "analogy", "max-vocab"}),
                          out);
    if (cmd == "vocab") return vocab_command(Flags(rest, {"train", "output", "min-count"}), out);
    throw UsageError("unknown command '" + cmd + "'");
  } catch (const UsageError& e) {
    err << "pw2v: " << e.what() << "\n\n" << kUsage;
    return kExitUsage;
  } catch (const DistributedAbort& e) {
    err << "pw2v: " << e.what() << '\n';
    RunReport partial;
    report_stats(partial, e.partial_stats());
    partial.write(err);
    return kExitFailure;
  } catch (const Error& e) {
    err << "pw2v: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "pw2v: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace pw2v::cli
