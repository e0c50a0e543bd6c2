#include "sg/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <variant>

#include <CLI11.hpp>

#include "sg/autoconstrain.hpp"
#include "sg/corpus.hpp"
#include "sg/dof.hpp"
#include "sg/graph.hpp"
#include "sg/render.hpp"
#include "sg/sequence.hpp"
#include "sg/solver.hpp"
#include "sg/stats.hpp"
#include "sg/synth.hpp"

namespace sg {

namespace {

namespace fs = std::filesystem;

enum class LogLevel { Off, Info, Debug };

LogLevel log_level() {
  const char* v = std::getenv("SG_LOG");
  if (!v) return LogLevel::Off;
  const std::string s = v;
  if (s == "debug") return LogLevel::Debug;
  if (s == "info") return LogLevel::Info;
  return LogLevel::Off;
}

struct Context {
  std::ostream& out;
  std::ostream& err;
  LogLevel level = log_level();
  int jobs = 1;
  bool dataError = false;

  void log(LogLevel at, const std::string& msg) const {
    if (level >= at) err << "[sg] " << msg << "\n";
  }
  void diagnose(const std::string& path, std::size_t line, const std::string& msg) {
    err << path << ":" << line << ": " << msg << "\n";
    dataError = true;
  }
};

/// Reads `path` in batches, parses and transforms records on `jobs`
/// threads, and hands results to `sink` in file order.
template <class Work, class Sink>
std::size_t stream_corpus(Context& ctx, const std::string& path, bool keepRaw, Work work, Sink sink) {
  using R = std::invoke_result_t<Work, Sketch&>;
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  constexpr std::size_t kBatch = 1024;
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::vector<std::variant<std::monostate, std::string, R>> slots;
  std::size_t lineNo = 0, processed = 0;
  bool more = true;
  while (more) {
    lines.clear();
    std::string text;
    while (lines.size() < kBatch && (more = static_cast<bool>(std::getline(in, text)))) {
      ++lineNo;
      if (!text.empty() && text.back() == '\r') text.pop_back();
      if (text.find_first_not_of(" \t") == std::string::npos) continue;
      lines.emplace_back(lineNo, std::move(text));
    }
    slots.assign(lines.size(), std::monostate{});
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < lines.size();) {
        try {
          Sketch s = parse_record(lines[i].second, keepRaw);
          slots[i].template emplace<2>(work(s));
        } catch (const Error& e) {
          slots[i].template emplace<1>(std::string(e.what()));
        }
      }
    };
    const int threads = std::max(1, std::min<int>(ctx.jobs, static_cast<int>(lines.size())));
    if (threads == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (auto* msg = std::get_if<1>(&slots[i])) {
        ctx.diagnose(path, lines[i].first, *msg);
      } else if (auto* r = std::get_if<2>(&slots[i])) {
        sink(*r);
        ++processed;
      }
    }
  }
  ctx.log(LogLevel::Info, path + ": " + std::to_string(processed) + " sketches");
  return processed;
}

std::set<PrimitiveType> parse_types(const std::vector<std::string>& names) {
  std::set<PrimitiveType> out;
  for (const auto& n : names) {
    const auto t = parse_primitive_type(n);
    if (!t) throw CLI::ValidationError("--allowed-types", "unknown primitive type '" + n + "'");
    out.insert(*t);
  }
  return out;
}

double parse_length_arg(const std::string& text, const char* flag) {
  const auto q = parse_quantity(text);
  if (!q) throw CLI::ValidationError(flag, "expected a length such as '5 mm' or '0.005'");
  return q->meters();
}

std::string file_stem_for(const std::string& id) {
  std::string out;
  for (char c : id) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
  return out.empty() ? "sketch" : out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
}

ConstructionSequence sequence_of(const Sketch& s, const std::string& order) {
  const auto g = build_graph(s);
  return order == "constraints-last" ? constraints_last_sequence(s, g) : canonical_sequence(s, g);
}

std::vector<Constraint> with_provenance(std::vector<Constraint> cs, const std::string& tag) {
  for (auto& c : cs) {
    c.provenance = tag;
    c.raw.clear();
  }
  return cs;
}

/// Finds a sketch by id, or by zero-based position when no id matches.
std::optional<Sketch> find_sketch(Context& ctx, const std::string& path, const std::string& key) {
  CorpusReader reader(path);
  reader.on_error([&](const MalformedRecord& m) { ctx.diagnose(path, m.line, m.cause); });
  std::optional<Sketch> byIndex;
  std::size_t index = 0;
  std::optional<std::size_t> wanted;
  if (!key.empty() && std::all_of(key.begin(), key.end(), ::isdigit)) wanted = std::stoul(key);
  while (auto s = reader.next()) {
    if (s->id == key) return s;
    if (wanted && index == *wanted) byIndex = std::move(s);
    ++index;
  }
  return byIndex;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Context ctx{out, err};
  CLI::App app{"Parametric sketch toolkit: corpora, constraint graphs, solving, inference and rendering.", "sg"};
  app.fallthrough();
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  app.add_option("--jobs", ctx.jobs, "Worker threads for per-sketch work")->check(CLI::PositiveNumber);

  std::function<void()> action;

  // stats
  std::string statsIn, csvDir;
  std::size_t topValues = 10;
  auto* stats = app.add_subcommand("stats", "Corpus statistics report");
  stats->add_option("in", statsIn, "Corpus file")->required();
  stats->add_option("--csv-dir", csvDir, "Also write comma-separated tables here");
  stats->add_option("--top", topValues, "Rows per value table in the text report");
  stats->callback([&] {
    action = [&] {
      StatsAccumulator acc;
      stream_corpus(ctx, statsIn, false, [](Sketch& s) { return std::move(s); },
                    [&](const Sketch& s) { acc.add(s); });
      const auto report = acc.report();
      out << format_stats_text(report, topValues);
      if (!csvDir.empty()) {
        fs::create_directories(csvDir);
        for (const auto& [name, table] : stats_csv_tables(report)) write_text(fs::path(csvDir) / (name + ".csv"), table);
      }
    };
  });

  // filter
  std::string filterIn, filterOut;
  FilterOptions filterOpts;
  std::vector<std::string> allowedTypes;
  auto* filter = app.add_subcommand("filter", "Keep sketches that pass the corpus rules");
  filter->add_option("--in", filterIn)->required();
  filter->add_option("--out", filterOut)->required();
  filter->add_option("--min-primitives", filterOpts.minPrimitives);
  filter->add_option("--min-constraints", filterOpts.minConstraints);
  filter->add_option("--max-primitives", filterOpts.maxPrimitives);
  filter->add_option("--allowed-types", allowedTypes, "Comma-separated primitive types")->delimiter(',');
  filter->callback([&] {
    action = [&] {
      if (!allowedTypes.empty()) filterOpts.allowedTypes = parse_types(allowedTypes);
      std::vector<MalformedRecord> errors;
      const auto n = filter_corpus(filterIn, filterOut, filterOpts, &errors);
      for (const auto& e : errors) ctx.diagnose(filterIn, e.line, e.cause);
      out << "kept " << n.kept << " dropped " << n.dropped << "\n";
    };
  });

  // split
  std::string splitIn, trainOut, testOut;
  std::size_t testCount = 0;
  std::uint64_t seed = 0;
  auto* split = app.add_subcommand("split", "Seeded train/test split by sketch id");
  split->add_option("--in", splitIn)->required();
  split->add_option("--test-count", testCount)->required();
  split->add_option("--seed", seed)->required();
  split->add_option("--train", trainOut)->required();
  split->add_option("--test", testOut)->required();
  split->callback([&] {
    action = [&] {
      const auto n = split_corpus(splitIn, testCount, seed, trainOut, testOut);
      out << "train " << n.train << " test " << n.test << "\n";
    };
  });

  // sequence
  std::string seqIn, seqOut, vocabIn, vocabOut, order = "canonical";
  bool describeOnly = false;
  auto* sequence = app.add_subcommand("sequence", "Construction sequences as token lines");
  sequence->add_option("--in", seqIn)->required();
  sequence->add_option("--out", seqOut, "Token lines (stdout if omitted)");
  sequence->add_option("--order", order)->check(CLI::IsMember({"canonical", "constraints-last"}));
  sequence->add_option("--vocab-in", vocabIn, "Use this vocabulary instead of building one");
  sequence->add_option("--vocab-out", vocabOut, "Write the vocabulary as JSON");
  sequence->add_flag("--describe", describeOnly, "Print N/E step lists instead of tokens");

  auto load_vocab = [&](const std::string& in) {
    if (!vocabIn.empty()) {
      std::ifstream f(vocabIn);
      if (!f) throw Error(ErrorCode::Io, "cannot open '" + vocabIn + "'");
      std::stringstream ss;
      ss << f.rdbuf();
      return TokenVocabulary::from_json(ss.str());
    }
    VocabularyBuilder counts;
    stream_corpus(ctx, in, false, [&](Sketch& s) { return sequence_of(s, order); },
                  [&](const ConstructionSequence& q) { counts.add(q); });
    return TokenVocabulary(counts, VocabularyOptions{});
  };

  sequence->callback([&] {
    action = [&] {
      std::ofstream file;
      if (!seqOut.empty()) {
        file.open(seqOut, std::ios::binary);
        if (!file) throw Error(ErrorCode::Io, "cannot write '" + seqOut + "'");
      }
      std::ostream& dst = seqOut.empty() ? out : file;
      if (describeOnly) {
        stream_corpus(ctx, seqIn, false, [&](Sketch& s) { return s.id + "\t" + describe(sequence_of(s, order)); },
                      [&](const std::string& line) { dst << line << "\n"; });
        return;
      }
      const auto vocab = load_vocab(seqIn);
      if (!vocabOut.empty()) write_text(vocabOut, vocab.to_json());
      stream_corpus(ctx, seqIn, false,
                    [&](Sketch& s) { return format_token_line(vocab.tokenize(sequence_of(s, order))); },
                    [&](const std::string& line) { dst << line << "\n"; });
    };
  });

  // entropy
  std::string entIn;
  std::size_t n1 = 0, n2 = 0;
  auto* entropy = app.add_subcommand("entropy", "Compressor entropy-rate estimate of token streams");
  entropy->add_option("--in", entIn)->required();
  entropy->add_option("--n1", n1, "Smaller prefix size (default n2/2)");
  entropy->add_option("--n2", n2, "Larger prefix size (default corpus size)");
  entropy->add_option("--order", order)->check(CLI::IsMember({"canonical", "constraints-last"}));
  entropy->add_option("--vocab-in", vocabIn);
  entropy->callback([&] {
    action = [&] {
      const auto vocab = load_vocab(entIn);
      std::vector<std::vector<int>> corpus;
      stream_corpus(ctx, entIn, false, [&](Sketch& s) { return vocab.tokenize(sequence_of(s, order)); },
                    [&](std::vector<int>& t) { corpus.push_back(std::move(t)); });
      const std::size_t hi = n2 ? n2 : corpus.size();
      const std::size_t lo = n1 ? n1 : hi / 2;
      const int width = vocab.size() <= 65536 ? 2 : 4;
      LzmaCompressor codec;
      const double rate = entropy_rate_estimate(corpus, lo, hi, codec, width);
      double tokens = 0.0;
      for (std::size_t i = lo; i < hi; ++i) tokens += static_cast<double>(corpus[i].size());
      out << "codec " << codec.name() << "\n";
      out << "vocabulary " << vocab.size() << " tokens, " << width << " bytes per token\n";
      out << "n1 " << lo << " n2 " << hi << "\n";
      out << "raw bits per sketch " << format_number(tokens * width * 8.0 / static_cast<double>(hi - lo)) << "\n";
      out << "entropy rate bits per sketch " << format_number(rate) << "\n";
    };
  });

  // solve
  std::string solveIn, solveOut;
  SolveOptions solveOpts;
  auto* solveCmd = app.add_subcommand("solve", "Solve every sketch in a corpus");
  solveCmd->add_option("--in", solveIn)->required();
  solveCmd->add_option("--out", solveOut, "Write solved sketches");
  solveCmd->add_option("--tol", solveOpts.residualTolerance, "Residual tolerance");
  solveCmd->add_option("--max-iterations", solveOpts.maxIterations);
  solveCmd->add_flag("--skip-unsupported", solveOpts.skipUnsupported, "Ignore constraints the solver cannot express");
  solveCmd->callback([&] {
    action = [&] {
      std::optional<CorpusWriter> writer;
      if (!solveOut.empty()) writer.emplace(solveOut);
      out << "id\tconverged\titerations\tmax_abs_residual\n";
      stream_corpus(ctx, solveIn, true, [&](Sketch& s) { return solve(s, {}, solveOpts); },
                    [&](const SolveResult& r) {
                      out << r.solvedSketch.id << "\t" << (r.converged ? "yes" : "no") << "\t" << r.iterations << "\t"
                          << svg_number(r.maxAbsResidual) << "\n";
                      if (!r.converged) ctx.dataError = true;
                      if (writer) writer->write(r.solvedSketch);
                    });
      if (writer) writer->close();
    };
  });

  // edit
  std::string editIn, editOut, editId, editPrim, dxText = "0", dyText = "0";
  auto* edit = app.add_subcommand("edit", "Move one primitive and re-solve");
  edit->add_option("--in", editIn)->required();
  edit->add_option("--id", editId, "Sketch id or zero-based position")->required();
  edit->add_option("--primitive", editPrim, "Primitive id to move")->required();
  edit->add_option("--dx", dxText, "Translation, e.g. '5 mm'");
  edit->add_option("--dy", dyText);
  edit->add_option("--out", editOut, "Write the edited sketch");
  edit->add_option("--tol", solveOpts.residualTolerance);
  edit->callback([&] {
    action = [&] {
      const Vec2 by{parse_length_arg(dxText, "--dx"), parse_length_arg(dyText, "--dy")};
      const auto s = find_sketch(ctx, editIn, editId);
      if (!s) throw Error(ErrorCode::MalformedRecord, "no sketch '" + editId + "' in " + editIn);
      const auto it = std::find_if(s->primitives.begin(), s->primitives.end(),
                                   [&](const Primitive& p) { return p.id == editPrim; });
      if (it == s->primitives.end()) throw Error(ErrorCode::DanglingReference, "no primitive '" + editPrim + "'");
      const Edit e{static_cast<int>(it - s->primitives.begin()), translated(to_standard(*it), by)};
      const auto r = edit_propagate(*s, std::span(&e, 1), solveOpts);
      out << s->id << "\tconverged " << (r.converged ? "yes" : "no") << "\titerations " << r.iterations
          << "\tmax_abs_residual " << svg_number(r.maxAbsResidual) << "\n";
      if (!r.converged) ctx.dataError = true;
      if (!editOut.empty()) write_corpus({r.solvedSketch}, editOut);
    };
  });

  // autoconstrain
  std::string acIn, acOut;
  bool strip = false;
  double tol = 1e-6;
  int dofTarget = 3;
  CandidateOptions candOpts;
  auto* autoc = app.add_subcommand("autoconstrain", "Infer constraints from geometry");
  autoc->add_option("--in", acIn)->required();
  autoc->add_option("--out", acOut)->required();
  autoc->add_flag("--strip-constraints", strip, "Drop the input constraints from the output");
  autoc->add_option("--tol", tol, "Satisfaction tolerance");
  autoc->add_option("--dof-target", dofTarget);
  autoc->add_option("--distance-percentile", candOpts.distancePercentile);
  autoc->callback([&] {
    action = [&] {
      CorpusWriter writer(acOut);
      stream_corpus(ctx, acIn, true,
                    [&](Sketch& s) {
                      auto predicted = with_provenance(
                          infer_constraints(s, RankingPolicy::default_policy(), dofTarget, tol, candOpts),
                          "predicted");
                      Sketch o = std::move(s);
                      if (strip) {
                        o.constraints.clear();
                      } else {
                        o.constraints = with_provenance(std::move(o.constraints), "ground_truth");
                      }
                      o.constraints.insert(o.constraints.end(), predicted.begin(), predicted.end());
                      return o;
                    },
                    [&](const Sketch& s) { writer.write(s); });
      writer.close();
      out << "wrote " << writer.count() << " sketches\n";
    };
  });

  // eval
  std::string predIn, gtIn;
  auto* eval = app.add_subcommand("eval", "Precision, recall and F1 of predicted constraints");
  eval->add_option("--pred", predIn)->required();
  eval->add_option("--gt", gtIn)->required();
  eval->callback([&] {
    action = [&] {
      std::map<std::string, std::vector<Constraint>> predicted;
      stream_corpus(ctx, predIn, false,
                    [](Sketch& s) {
                      std::vector<Constraint> cs;
                      for (auto& c : s.constraints)
                        if (c.provenance != "ground_truth") cs.push_back(std::move(c));
                      return std::pair{s.id, std::move(cs)};
                    },
                    [&](auto& p) { predicted[p.first] = std::move(p.second); });
      EvalAccumulator acc;
      std::size_t missing = 0;
      stream_corpus(ctx, gtIn, false,
                    [](Sketch& s) {
                      std::vector<Constraint> cs;
                      for (auto& c : s.constraints)
                        if (c.provenance != "predicted") cs.push_back(std::move(c));
                      return std::pair{s.id, std::move(cs)};
                    },
                    [&](auto& p) {
                      const auto it = predicted.find(p.first);
                      if (it == predicted.end()) ++missing;
                      const std::vector<Constraint> none;
                      acc.add(p.first, it == predicted.end() ? none : it->second, p.second);
                    });
      const auto m = acc.mean();
      out << "precision " << svg_number(m.precision) << "\nrecall " << svg_number(m.recall) << "\nf1 "
          << svg_number(m.f1) << "\n";
      out << "evaluated " << acc.evaluated() << " skipped_empty_ground_truth " << acc.skipped()
          << " missing_predictions " << missing << "\n";
    };
  });

  // render
  std::string renderIn, outDir, renderId;
  bool steps = false, handdrawn = false;
  RenderOptions ro;
  auto* render = app.add_subcommand("render", "SVG rendering");
  render->add_option("--in", renderIn)->required();
  render->add_option("--out-dir", outDir)->required();
  render->add_option("--id", renderId, "Sketch id or zero-based position (all sketches if omitted)");
  render->add_flag("--steps", steps, "One frame per construction step");
  render->add_flag("--handdrawn", handdrawn, "Jittered strokes");
  render->add_option("--noise", ro.noiseMagnitude, "Noise as a fraction of the bounding-box diagonal");
  auto* renderSeed = render->add_option("--seed", ro.noiseSeed, "Noise seed (required with --handdrawn)");
  render->add_option("--stroke-width", ro.strokeWidth);
  render->callback([&] {
    if (handdrawn && renderSeed->count() == 0) throw CLI::RequiredError("--seed");
    action = [&] {
      fs::create_directories(outDir);
      std::size_t files = 0;
      auto emit = [&](const Sketch& s) {
        const auto stem = file_stem_for(s.id);
        if (steps) {
          const auto frames = render_steps(s, sequence_of(s, "canonical"), ro);
          for (std::size_t k = 0; k < frames.size(); ++k, ++files)
            write_text(fs::path(outDir) / (stem + "_step" + std::to_string(k + 1) + ".svg"), frames[k]);
        } else {
          write_text(fs::path(outDir) / (stem + ".svg"), handdrawn ? render_handdrawn(s, ro) : render_svg(s, ro));
          ++files;
        }
      };
      if (!renderId.empty()) {
        const auto s = find_sketch(ctx, renderIn, renderId);
        if (!s) throw Error(ErrorCode::MalformedRecord, "no sketch '" + renderId + "' in " + renderIn);
        emit(*s);
      } else {
        stream_corpus(ctx, renderIn, false, [](Sketch& s) { return std::move(s); }, emit);
      }
      out << "wrote " << files << " files to " << outDir << "\n";
    };
  });

  // synth
  std::string synthOut, profile = "mixed";
  std::size_t count = 0;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth->add_option("--n", count)->required();
  synth->add_option("--seed", seed)->required();
  synth->add_option("--out", synthOut)->required();
  synth->add_option("--profile", profile, "mixed, rectangle, slotted-plate, bolt-circle or polyline-fillets");
  synth->callback([&] {
    action = [&] {
      const auto p = SynthProfile::parse(profile);
      CorpusWriter writer(synthOut);
      for (std::size_t i = 0; i < count; ++i) writer.write(synth_sketch(seed, i, p));
      writer.close();
      out << "wrote " << writer.count() << " sketches\n";
    };
  });

  // dof
  std::string dofIn;
  auto* dof = app.add_subcommand("dof", "Degrees-of-freedom report per sketch");
  dof->add_option("in", dofIn)->required();
  dof->callback([&] {
    action = [&] {
      std::vector<DofSample> samples;
      out << "id\ttotal\tremoved\tremaining\n";
      stream_corpus(ctx, dofIn, false, [](Sketch& s) { return std::pair{s.id, sketch_dof_report(s)}; },
                    [&](const auto& p) {
                      out << format_dof_line(p.first, p.second) << "\n";
                      samples.push_back({static_cast<double>(p.second.totalDof),
                                         static_cast<double>(p.second.removedDof)});
                    });
      try {
        out << "pearson " << svg_number(dof_correlation(samples)) << "\n";
      } catch (const Error& e) {
        out << "pearson undefined (" << e.what() << ")\n";
      }
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }
  try {
    if (action) action();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return ctx.dataError ? 2 : 0;
}

}  // namespace sg
