#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "paragen/checkpoint.hpp"
#include "paragen/corpus.hpp"
#include "paragen/dataset.hpp"
#include "paragen/decoding.hpp"
#include "paragen/errors.hpp"
#include "paragen/ingest.hpp"
#include "paragen/metrics.hpp"
#include "paragen/synthetic.hpp"
#include "paragen/training.hpp"

namespace paragen::cli {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// JSON configuration files: top-level keys set global flags, an object under
// a subcommand name sets that subcommand's flags. Keys are flag names without
// the leading dashes.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      j = json::parse(input);
    } catch (const json::exception& e) {
      throw CLI::ConversionError("config file is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    std::vector<CLI::ConfigItem> items;
    collect(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static void collect(const json& obj, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : obj.items()) {
      if (value.is_object()) {
        auto nested = parents;
        nested.push_back(key);
        collect(value, nested, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

void add_options_json(const CLI::App& app, ordered_json& out) {
  for (const CLI::Option* opt : app.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    if (opt->get_expected_min() == 0) {
      out[name] = opt->count() > 0;
      continue;
    }
    if (opt->count() > 0) {
      const auto& results = opt->reduced_results();
      out[name] = results.empty() ? std::string() : results.back();
    } else {
      out[name] = opt->get_default_str();
    }
  }
}

std::string effective_config(const CLI::App& app, const CLI::App& sub) {
  ordered_json j;
  add_options_json(app, j);
  ordered_json s;
  add_options_json(sub, s);
  j[sub.get_name()] = s;
  return j.dump();
}

struct Global {
  std::uint64_t seed = 1;
  bool verbose = false;
};

struct MineArgs {
  std::string docs;
  std::string urls;
  std::string out;
  std::string provenance;
  std::string gold;
  std::string abbreviations;
  std::size_t k = 3;
  double min_sim = 0.5;
  double max_sim = 0.95;
  std::size_t min_tokens = 4;
  std::size_t max_tokens = 60;
  int threads = 1;
  double rate = 1.0;
  std::string user_agent = FetchConfig{}.user_agent;
  std::size_t workers = 4;
  int timeout = 10;
  bool ignore_robots = false;
};

struct TrainArgs {
  std::string data;
  std::string out;
  std::string log;
  std::string vocab;
  TrainConfig cfg;
  std::string gate = "learned";
  int threads = 0;
};

struct GenerateArgs {
  std::string checkpoint;
  std::string vocab;
  std::string input;
  std::string out;
  std::size_t beam = 4;
  bool greedy = false;
  std::size_t nbest = 1;
  double alpha = 0.7;
  std::size_t max_len = 50;
  std::string gate = "learned";
};

struct EvalArgs {
  std::string hyp;
  std::string ref;
  bool smoothing = false;
  int threads = 1;
};

struct SynthArgs {
  std::string task = "copy";
  std::string out;
  std::string held_out;
  std::string gold;
  std::size_t pairs = 2000;
  std::size_t held_out_pairs = 200;
  std::size_t planted = 50;
  std::size_t distractors = 200;
};

GateMode parse_gate(const std::string& name) {
  if (name == "learned") return GateMode::learned;
  if (name == "generate-only") return GateMode::generate_only;
  throw ValidationError("unknown gate mode '" + name + "' (expected learned or generate-only)");
}

std::string format_score(double score) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", score);
  return buf;
}

std::string join_tokens(const TokenList& tokens) {
  std::string s;
  for (const auto& t : tokens) {
    if (!s.empty()) s.push_back(' ');
    s += t;
  }
  return s;
}

std::vector<TokenList> read_tokenized(const std::string& path) {
  std::vector<TokenList> out;
  for (const auto& line : read_lines(path)) out.push_back(tokenize(line));
  return out;
}

int cmd_mine(const MineArgs& a, const Global& g, std::ostream& out, std::ostream& err) {
  if (a.docs.empty() == a.urls.empty()) {
    throw ValidationError("mine: give exactly one of --docs or --urls");
  }
  MineConfig cfg;
  cfg.k = a.k;
  cfg.min_sim = a.min_sim;
  cfg.max_sim = a.max_sim;
  cfg.segmenter.min_tokens = a.min_tokens;
  cfg.segmenter.max_tokens = a.max_tokens;
  if (!a.abbreviations.empty()) cfg.segmenter.abbreviations = load_abbreviations(a.abbreviations);
  cfg.threads = a.threads;
  cfg.validate();

  IngestReport ingested;
  if (!a.docs.empty()) {
    if (!std::filesystem::is_directory(a.docs)) {
      throw ValidationError("mine: --docs " + a.docs + " is not a directory");
    }
    ingested = ingest_directory(a.docs);
  } else {
    FetchConfig fetch;
    fetch.min_interval_seconds = a.rate;
    fetch.user_agent = a.user_agent;
    fetch.workers = a.workers;
    fetch.timeout_seconds = a.timeout;
    fetch.respect_robots = !a.ignore_robots;
    std::vector<std::string> urls;
    for (auto& line : read_lines(a.urls)) {
      if (!line.empty() && line[0] != '#') urls.push_back(line);
    }
    ingested = ingest_urls(urls, fetch);
  }
  for (const auto& w : ingested.warnings) err << "warning: " << w << "\n";

  const MineResult result = align(ingested.documents, cfg);
  write_pairs_tsv(a.out, result.pairs);
  write_file(a.provenance.empty() ? a.out + ".jsonl" : a.provenance,
             format_provenance_jsonl(result.pairs));
  if (g.verbose) {
    err << "documents: " << result.documents << ", sentences: " << result.sentences << "\n";
  }
  out << "pairs: " << result.pairs.size() << "\n";
  if (!a.gold.empty()) {
    const auto plants = parse_plants_tsv(read_file(a.gold));
    const std::size_t hits = planted_hits(plants, result.pairs);
    out << "recall: " << hits << "/" << plants.size() << " ("
        << format_score(plants.empty() ? 0.0 : static_cast<double>(hits) / plants.size())
        << ")\n";
  }
  return kOk;
}

int cmd_train(TrainArgs a, const Global& g, std::ostream& out, std::ostream& err) {
  if (a.threads != 0) {
    throw ValidationError(
        "train does not accept --threads: the training loop is single-threaded so that "
        "seeded runs are reproducible");
  }
  a.cfg.seed = g.seed;
  a.cfg.gate = parse_gate(a.gate);
  a.cfg.validate();
  const auto dataset = read_pairs_tsv(a.data);
  if (dataset.empty()) throw ValidationError("train: " + a.data + " holds no pairs");

  const std::string log_path = a.log.empty() ? a.out + ".log" : a.log;
  std::ofstream log(log_path, std::ios::binary | std::ios::trunc);
  if (!log) throw ValidationError("cannot write " + log_path);

  TrainHooks hooks;
  hooks.on_epoch = [&](const EpochStats& s) {
    ordered_json j;
    j["epoch"] = s.epoch;
    j["mean_nll"] = s.mean_nll;
    j["token_accuracy"] = s.token_accuracy;
    j["wall_seconds"] = s.wall_seconds;
    log << j.dump() << "\n";
    log.flush();
    if (g.verbose) err << j.dump() << "\n";
  };
  hooks.warn = [&](const std::string& w) { err << "warning: " << w << "\n"; };

  std::uint64_t fingerprint = 0;
  hooks.on_checkpoint = [&](std::size_t epoch, const ModelParams& params) {
    save_checkpoint(params, fingerprint, a.out + ".epoch-" + std::to_string(epoch));
  };

  TrainResult result;
  if (!a.vocab.empty()) {
    Vocabulary vocab = Vocabulary::load(a.vocab);
    fingerprint = vocab.fingerprint();
    result = train(dataset, std::move(vocab), a.cfg, hooks);
  } else {
    // The vocabulary is only known inside train(); rebuild it up front so that
    // intermediate checkpoints carry the right fingerprint.
    std::vector<TokenList> sides;
    for (const auto& p : dataset) {
      sides.push_back(tokenize(p.x));
      sides.push_back(tokenize(p.y));
    }
    Vocabulary vocab = build_vocab(sides, a.cfg.vocab_size, a.cfg.min_count);
    fingerprint = vocab.fingerprint();
    result = train(dataset, std::move(vocab), a.cfg, hooks);
  }

  save_checkpoint(result.params, result.vocab.fingerprint(), a.out);
  result.vocab.save(a.out + ".vocab");
  if (result.report.truncated_examples > 0) {
    err << "warning: " << result.report.truncated_examples << " examples truncated\n";
  }
  const auto& last = result.report.epochs;
  out << "epochs: " << last.size();
  if (!last.empty()) out << ", final mean NLL: " << format_score(last.back().mean_nll);
  out << "\n";
  return kOk;
}

int cmd_generate(const GenerateArgs& a, const Global&, std::ostream& out, std::ostream&) {
  const GateMode mode = parse_gate(a.gate);
  const Vocabulary vocab = Vocabulary::load(a.vocab.empty() ? a.checkpoint + ".vocab" : a.vocab);
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  if (ckpt.vocab_fingerprint != vocab.fingerprint()) {
    throw CheckpointError("checkpoint " + a.checkpoint + " was trained with a different vocabulary");
  }
  if (ckpt.params.dims.vocab_size != vocab.size()) {
    throw CheckpointWidthError("checkpoint vocabulary size " +
                               std::to_string(ckpt.params.dims.vocab_size) +
                               " differs from vocabulary file size " + std::to_string(vocab.size()));
  }
  BeamConfig beam;
  beam.beam_width = a.greedy ? 1 : a.beam;
  beam.max_length = a.max_len;
  beam.length_penalty = a.alpha;
  beam.validate();
  if (a.nbest == 0) throw ValidationError("--nbest must be at least 1");

  std::string tsv;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(a.input)) {
    ++line_no;
    const TokenList tokens = tokenize(line);
    if (tokens.empty()) {
      throw ValidationError("input line " + std::to_string(line_no) + " is empty");
    }
    const SourceEncoding src = encode_source(tokens, vocab);
    if (a.greedy) {
      const auto ids = greedy_ids(src, ckpt.params, a.max_len, mode);
      const double lp = sequence_log_prob(src, ids, ckpt.params, mode);
      const double score = length_normalized_score(lp, ids.size(), a.alpha);
      tsv += "1\t" + format_score(score) + "\t" + join_tokens(render(ids, src.vocab)) + "\n";
      continue;
    }
    const auto ranked = beam_search(src, ckpt.params, beam, mode);
    for (std::size_t r = 0; r < ranked.size() && r < a.nbest; ++r) {
      tsv += std::to_string(r + 1) + "\t" + format_score(ranked[r].score) + "\t" +
             join_tokens(ranked[r].tokens) + "\n";
    }
  }
  write_file(a.out, tsv);
  out << "sentences: " << line_no << "\n";
  return kOk;
}

int cmd_eval(const EvalArgs& a, const Global&, std::ostream& out, std::ostream&) {
  if (a.threads < 1) throw ValidationError("--threads must be at least 1");
  const auto hyps = read_tokenized(a.hyp);
  const auto refs = read_tokenized(a.ref);
  const BleuReport report = bleu(hyps, refs, a.smoothing, a.threads);
  std::size_t hits = 0, total = 0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const TokenList& gold = refs[i];
    total += std::max<std::size_t>(gold.size(), 1);
    for (std::size_t t = 0; t < gold.size() && t < hyps[i].size(); ++t) {
      if (hyps[i][t] == gold[t]) ++hits;
    }
  }
  ordered_json j = ordered_json::parse(bleu_to_json(report));
  j["token_accuracy"] = static_cast<double>(hits) / static_cast<double>(total);
  out << j.dump() << "\n";
  return kOk;
}

int cmd_synth(const SynthArgs& a, const Global& g, std::ostream& out, std::ostream&) {
  if (a.task == "copy") {
    CopyTaskConfig cfg;
    cfg.pairs = a.pairs;
    cfg.seed = g.seed;
    const CopyTask train_split = make_copy_task(cfg);
    write_pairs_tsv(a.out, train_split.pairs);
    if (!a.held_out.empty()) {
      CopyTaskConfig test_cfg = cfg;
      test_cfg.pairs = a.held_out_pairs;
      test_cfg.seed = g.seed + 1;
      const CopyTask test_split = make_copy_task(test_cfg, train_split.oov_tokens);
      write_pairs_tsv(a.held_out, test_split.pairs);
    }
    copy_task_vocab(train_split).save(a.out + ".vocab");
    out << "pairs: " << train_split.pairs.size() << "\n";
    return kOk;
  }
  if (a.task == "planted") {
    PlantedCorpusConfig cfg;
    cfg.planted_pairs = a.planted;
    cfg.distractors = a.distractors;
    cfg.seed = g.seed;
    const PlantedCorpus corpus = make_planted_corpus(cfg);
    std::filesystem::create_directories(a.out);
    for (const auto& doc : corpus.documents) {
      std::string name = doc.id;
      std::replace(name.begin(), name.end(), '/', '_');
      write_file(std::filesystem::path(a.out) / (name + ".json"), document_to_json(doc));
    }
    if (!a.gold.empty()) write_file(a.gold, format_plants_tsv(corpus.plants));
    out << "documents: " << corpus.documents.size() << "\n";
    return kOk;
  }
  throw ValidationError("unknown synth task '" + a.task + "' (expected copy or planted)");
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Paraphrase mining and pointer-generator paraphrasing", "paragen"};
  app.option_defaults()->always_capture_default()->multi_option_policy(
      CLI::MultiOptionPolicy::TakeLast);
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON configuration file; flags override its values");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.fallthrough();

  Global g;
  app.add_option("--seed", g.seed, "Random seed");
  app.add_flag("--verbose", g.verbose, "Extra diagnostics on stderr");

  MineArgs mine_args;
  auto* mine = app.add_subcommand("mine", "Mine aligned sentence pairs from documents");
  mine->add_option("--docs", mine_args.docs, "Directory of JSON documents");
  mine->add_option("--urls", mine_args.urls, "File with one URL per line to fetch");
  mine->add_option("--out", mine_args.out, "Output pairs TSV")->required();
  mine->add_option("--provenance", mine_args.provenance,
                   "Provenance JSON lines (default: <out>.jsonl)");
  mine->add_option("--gold", mine_args.gold, "Known pairs TSV; prints recall against it");
  mine->add_option("--k", mine_args.k, "Neighbours retrieved per sentence");
  mine->add_option("--min-sim", mine_args.min_sim, "Lowest accepted cosine");
  mine->add_option("--max-sim", mine_args.max_sim, "Highest accepted cosine");
  mine->add_option("--min-tokens", mine_args.min_tokens, "Shortest kept sentence");
  mine->add_option("--max-tokens", mine_args.max_tokens, "Longest kept sentence");
  mine->add_option("--abbreviations", mine_args.abbreviations, "Abbreviation stop-list file");
  mine->add_option("--threads", mine_args.threads, "Query threads");
  mine->add_option("--rate", mine_args.rate, "Seconds between requests to one host");
  mine->add_option("--user-agent", mine_args.user_agent, "HTTP user agent");
  mine->add_option("--workers", mine_args.workers, "Concurrent hosts when fetching");
  mine->add_option("--timeout", mine_args.timeout, "HTTP timeout in seconds");
  mine->add_flag("--ignore-robots", mine_args.ignore_robots, "Do not consult robots.txt");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a pointer-generator model");
  train_cmd->add_option("--data", train_args.data, "Training pairs TSV")->required();
  train_cmd->add_option("--out", train_args.out, "Checkpoint path")->required();
  train_cmd->add_option("--log", train_args.log, "Epoch log (default: <out>.log)");
  train_cmd->add_option("--vocab", train_args.vocab, "Use this vocabulary file");
  train_cmd->add_option("--lr", train_args.cfg.learning_rate, "Adam learning rate");
  train_cmd->add_option("--epochs", train_args.cfg.epochs, "Epochs");
  train_cmd->add_option("--clip", train_args.cfg.clip_norm, "Global gradient norm clip");
  train_cmd->add_option("--max-source-len", train_args.cfg.max_source_len, "Source truncation");
  train_cmd->add_option("--max-target-len", train_args.cfg.max_target_len, "Target truncation");
  train_cmd->add_option("--vocab-size", train_args.cfg.vocab_size,
                        "Vocabulary size including reserved tokens");
  train_cmd->add_option("--min-count", train_args.cfg.min_count, "Minimum token count");
  train_cmd->add_option("--embedding", train_args.cfg.embedding, "Embedding width");
  train_cmd->add_option("--hidden", train_args.cfg.hidden, "Encoder width per direction");
  train_cmd->add_option("--state", train_args.cfg.state, "Decoder width");
  train_cmd->add_option("--attention", train_args.cfg.attention, "Attention width");
  train_cmd->add_option("--checkpoint-every", train_args.cfg.checkpoint_every,
                        "Epochs between intermediate checkpoints (0: none)");
  train_cmd->add_option("--gate", train_args.gate, "learned or generate-only");
  train_cmd->add_option("--threads", train_args.threads, "Not supported; training is serial")
      ->group("");

  GenerateArgs gen_args;
  auto* gen = app.add_subcommand("generate", "Paraphrase sentences with a trained model");
  gen->add_option("--checkpoint", gen_args.checkpoint, "Checkpoint path")->required();
  gen->add_option("--vocab", gen_args.vocab, "Vocabulary file (default: <checkpoint>.vocab)");
  gen->add_option("--input", gen_args.input, "One source sentence per line")->required();
  gen->add_option("--out", gen_args.out, "Output TSV of rank, score, hypothesis")->required();
  gen->add_option("--beam", gen_args.beam, "Beam width");
  gen->add_flag("--greedy", gen_args.greedy, "Greedy decoding instead of beam search");
  gen->add_option("--nbest", gen_args.nbest, "Hypotheses written per source");
  gen->add_option("--alpha", gen_args.alpha, "Length normalization exponent");
  gen->add_option("--max-len", gen_args.max_len, "Maximum output length");
  gen->add_option("--gate", gen_args.gate, "learned or generate-only");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Score hypotheses against references");
  eval->add_option("--hyp", eval_args.hyp, "Hypotheses, one per line")->required();
  eval->add_option("--ref", eval_args.ref, "References, one per line")->required();
  eval->add_flag("--smoothing", eval_args.smoothing, "Add-one smoothing of n-gram precisions");
  eval->add_option("--threads", eval_args.threads, "Counting threads");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Write synthetic fixtures");
  synth->add_option("--task", synth_args.task, "copy or planted");
  synth->add_option("--out", synth_args.out, "Pairs TSV (copy) or document directory (planted)")
      ->required();
  synth->add_option("--held-out", synth_args.held_out, "Held-out pairs TSV (copy)");
  synth->add_option("--gold", synth_args.gold, "Planted pair list TSV (planted)");
  synth->add_option("--pairs", synth_args.pairs, "Training pairs (copy)");
  synth->add_option("--held-out-pairs", synth_args.held_out_pairs, "Held-out pairs (copy)");
  synth->add_option("--planted", synth_args.planted, "Planted pairs (planted)");
  synth->add_option("--distractors", synth_args.distractors, "Unrelated sentences (planted)");

  std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << "\n";
    return kInvalid;
  }

  const CLI::App* active = app.get_subcommands().front();
  err << "config: " << effective_config(app, *active) << "\n";

  try {
    if (active == mine) return cmd_mine(mine_args, g, out, err);
    if (active == train_cmd) return cmd_train(train_args, g, out, err);
    if (active == gen) return cmd_generate(gen_args, g, out, err);
    if (active == eval) return cmd_eval(eval_args, g, out, err);
    return cmd_synth(synth_args, g, out, err);
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const CheckpointError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    err << "unexpected error: " << e.what() << "\n";
    return kUnexpected;
  }
}

} // namespace paragen::cli
