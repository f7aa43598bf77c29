// SPDX-License-Identifier: Apache-2.0
// lexstyle command-line tool: scores, profiles, training stages, evaluation,
// sampling and a synthetic corpus generator.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "lexstyle/checkpoint.hpp"
#include "lexstyle/config.hpp"
#include "lexstyle/corpus.hpp"
#include "lexstyle/error.hpp"
#include "lexstyle/evaluator.hpp"
#include "lexstyle/io.hpp"
#include "lexstyle/language_model.hpp"
#include "lexstyle/lexicon.hpp"
#include "lexstyle/log.hpp"
#include "lexstyle/pipeline.hpp"
#include "lexstyle/rl_trainer.hpp"
#include "lexstyle/rng.hpp"
#include "lexstyle/sampler.hpp"
#include "lexstyle/text.hpp"
#include "lexstyle/toy_world.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lexstyle;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
};

ExperimentConfig resolve_config(const Common& c) {
  ExperimentConfig cfg = c.config_path.empty() ? default_config() : load_config(c.config_path);
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

fs::path corpus_root(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("LEXSTYLE_CORPUS_ROOT"); env && *env) return env;
  throw InputError("no corpus root: pass --corpus or set LEXSTYLE_CORPUS_ROOT");
}

std::string file_hash(const fs::path& p) { return io::hex64(io::fnv1a(io::read_file(p))); }

json corpus_hashes(const std::map<std::string, std::string>& texts) {
  json j = json::object();
  for (const auto& [author, text] : texts) j[author] = io::hex64(io::fnv1a(text));
  return j;
}

json base_manifest(const std::string& command, const ExperimentConfig& cfg) {
  return {{"format_version", 1},
          {"command", command},
          {"seed", cfg.seed},
          {"config", json::parse(format_config(cfg))}};
}

void write_manifest(const fs::path& artifact, const json& manifest) {
  io::write_file(artifact.string() + ".manifest.json", manifest.dump(2) + "\n");
}

json read_lineage(const fs::path& checkpoint) {
  const fs::path m = checkpoint.string() + ".manifest.json";
  if (!fs::exists(m)) return json::array();
  try {
    const json j = json::parse(io::read_file(m));
    if (j.contains("lineage")) return j.at("lineage");
  } catch (const json::exception&) {
  }
  log::warning("could not read lineage from " + m.string());
  return json::array();
}

std::vector<std::string> scoring_paragraphs(const fs::path& path, const std::string& pattern) {
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& e : fs::recursive_directory_iterator(path))
      if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
    std::sort(files.begin(), files.end());
  } else if (fs::exists(path)) {
    files.push_back(path);
  } else {
    throw InputError("missing corpus: " + path.string());
  }
  std::vector<std::string> out;
  for (const fs::path& f : files) {
    std::vector<std::string> paras = clean_paragraphs(io::read_file(f), pattern);
    out.insert(out.end(), paras.begin(), paras.end());
  }
  if (out.empty()) throw InputError("corpus has no paragraphs: " + path.string());
  return out;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  Common common;
  int paragraphs = ToyWorldOptions{}.paragraphs_per_author;
};

int cmd_synth(const SynthArgs& a) {
  const ExperimentConfig cfg = resolve_config(a.common);
  ToyWorldOptions opt;
  opt.seed = cfg.seed;
  if (a.paragraphs < 2) throw InputError("--paragraphs must be at least 2");
  opt.paragraphs_per_author = a.paragraphs;
  const ToyWorld world = make_toy_world(opt);
  write_toy_world(world, a.common.out);
  std::printf("wrote synthetic corpus for %zu authors to %s (planted outlier: %s)\n",
              world.author_texts.size(), a.common.out.c_str(), world.skewed_author.c_str());
  return 0;
}

struct BuildScoresArgs {
  Common common;
  std::string corpus;
  std::string lexicons;
};

int cmd_build_scores(const BuildScoresArgs& a) {
  const ExperimentConfig cfg = resolve_config(a.common);
  const LexiconSet lexicons = load_lexicon_dir(a.lexicons);
  const std::vector<std::string> paragraphs =
      scoring_paragraphs(a.corpus, cfg.corpus.boilerplate_pattern);
  const CooccurrenceModel model = build_cooccurrence(paragraphs, lexicons);
  const StyleScoreTable table = build_score_table(model, lexicons);
  save_score_table(table, a.common.out);

  std::printf("paragraphs %zu, scored words %zu\n", paragraphs.size(), table.size());
  for (StyleCategory c : kAllCategories) {
    std::size_t positive = 0;
    for (const auto& row : table.rows()) positive += row[index_of(c)] > 0.0;
    std::printf("  %-10s positive words %zu\n", std::string(category_name(c)).c_str(), positive);
  }
  json m = base_manifest("build-scores", cfg);
  m["inputs"] = {{"corpus", a.corpus}, {"lexicons", a.lexicons}};
  m["outputs"] = {{"score_table", a.common.out}, {"hash", file_hash(a.common.out)}};
  write_manifest(a.common.out, m);
  return 0;
}

struct ProfileArgs {
  Common common;
  std::string corpus;
  std::string table;
  std::optional<std::size_t> top_k;
  std::string split_out;
};

int cmd_profile(const ProfileArgs& a) {
  const ExperimentConfig cfg = resolve_config(a.common);
  const StyleScoreTable table = load_score_table(a.table);
  const auto texts = load_corpus_dir(corpus_root(a.corpus));
  const auto corpora = split_corpora(texts, cfg.corpus, cfg.seed);
  const auto profiles = author_profiles(corpora, table);
  save_profiles(profiles, a.common.out);

  std::size_t k = a.top_k.value_or(cfg.top_k);
  if (k > profiles.size()) {
    log::warning("top-k " + std::to_string(k) + " exceeds the " + std::to_string(profiles.size()) +
                 " authors; clamped");
    k = profiles.size();
  }
  const auto ranked = rank_by_deviation(profiles, k);
  std::printf("authors by deviation from the corpus average:\n");
  json selected = json::array();
  for (const RankedAuthor& r : ranked) {
    std::printf("  %-20s %.6f\n", r.author.c_str(), r.distance);
    selected.push_back({{"author", r.author}, {"distance", io::fixed6(r.distance)}});
  }
  if (!a.split_out.empty())
    io::write_file(a.split_out, format_split_manifest(make_split_manifest(
                                    corpora, cfg.seed, cfg.corpus.test_fraction)));

  json m = base_manifest("profile", cfg);
  m["inputs"] = {{"corpus", corpus_hashes(texts)}, {"score_table", file_hash(a.table)}};
  m["selected"] = selected;
  m["outputs"] = {{"profiles", a.common.out}, {"hash", file_hash(a.common.out)}};
  if (!a.split_out.empty()) m["outputs"]["split"] = a.split_out;
  write_manifest(a.common.out, m);
  return 0;
}

struct TrainArgs {
  Common common;
  std::string stage;
  std::string corpus;
  std::string init;
  std::string author;
  std::string table;
  std::string profiles;
  std::string reward_log;
  std::optional<std::size_t> max_episodes;
  std::optional<std::string> baseline;
};

int cmd_train(const TrainArgs& a) {
  ExperimentConfig cfg = resolve_config(a.common);
  const auto stage = parse_train_stage(a.stage);
  if (!stage) throw InputError("unknown stage '" + a.stage + "'");

  // Lineage is checked before any corpus work.
  std::optional<Checkpoint> init;
  if (!a.init.empty()) init = load_checkpoint(a.init);
  check_lineage(init ? std::optional<Stage>(init->stage) : std::nullopt, *stage);

  const auto texts = load_corpus_dir(corpus_root(a.corpus));
  const auto corpora = split_corpora(texts, cfg.corpus, cfg.seed);
  const std::uint64_t stage_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(*stage) + 1);

  json m = base_manifest("train", cfg);
  m["stage"] = a.stage;
  m["inputs"] = {{"corpus", corpus_hashes(texts)}};
  json lineage = init ? read_lineage(a.init) : json::array();
  if (init) m["inputs"]["init"] = {{"path", a.init}, {"hash", file_hash(a.init)}};

  Checkpoint ckpt = [&]() -> Checkpoint {
    switch (*stage) {
      case TrainStage::pretrain: {
        const auto tokens = train_tokens(corpora);
        const Vocabulary vocab = Vocabulary::build(tokens, cfg.corpus.max_vocab);
        std::printf("pretraining on %zu tokens, vocabulary %zu\n", tokens.size(), vocab.size());
        return pretrain_model(vocab, tokens, cfg, stage_seed);
      }
      case TrainStage::finetune_global: {
        ClmOptions opt = cfg.finetune_global;
        opt.seed = stage_seed;
        finetune_model(*init, *stage,
                       global_finetune_tokens(corpora, cfg.corpus.finetune_paragraphs), opt);
        return std::move(*init);
      }
      case TrainStage::finetune_author: {
        if (a.author.empty()) throw InputError("finetune_author needs --author");
        ClmOptions opt = cfg.finetune_author;
        opt.seed = stage_seed;
        const auto tokens =
            finetune_set(find_author(corpora, a.author), cfg.corpus.finetune_paragraphs);
        finetune_model(*init, *stage, tokens, opt);
        m["author"] = a.author;
        return std::move(*init);
      }
      case TrainStage::rl: {
        if (a.author.empty() || a.table.empty() || a.profiles.empty())
          throw InputError("rl needs --author, --table and --profiles");
        if (a.max_episodes) cfg.rl.max_episodes = *a.max_episodes;
        if (a.baseline) {
          const auto mode = parse_baseline_mode(*a.baseline);
          if (!mode) throw InputError("unknown baseline mode '" + *a.baseline + "'");
          cfg.rl.baseline = *mode;
        }
        cfg.rl.seed = stage_seed;
        const StyleScoreTable table = load_score_table(a.table);
        const auto profiles = load_profiles(a.profiles);
        const auto it = profiles.find(a.author);
        if (it == profiles.end()) throw InputError("author '" + a.author + "' not in profiles");
        LexicalVector target = it->second;
        target.role = VectorRole::author_target;

        const ContextSet set = build_contexts(corpora, cfg.corpus.train_contexts_per_author,
                                              static_cast<std::size_t>(cfg.rl.context_len),
                                              cfg.seed, SplitPart::train);
        const auto contexts = encode_contexts(set, init->vocab);
        const StyleLookup lookup(table, init->vocab.words());
        const RlReport report = rl_train(*init, contexts, target, lookup, cfg.rl);
        const std::string log_path = a.reward_log.empty() ? a.common.out + ".rewards.tsv"
                                                          : a.reward_log;
        io::write_file(log_path, format_reward_log(report.rows));
        std::printf("rl: %zu contexts, %zu episodes, %zu skipped updates\n", report.contexts,
                    report.episodes, report.skipped_steps);
        if (!report.rows.empty())
          std::printf("mean reward: first context %.4f, last context %.4f\n",
                      report.rows.front().mean_reward, report.rows.back().mean_reward);
        m["author"] = a.author;
        m["inputs"]["score_table"] = file_hash(a.table);
        m["inputs"]["profiles"] = file_hash(a.profiles);
        m["outputs"]["reward_log"] = {{"path", log_path}, {"hash", file_hash(log_path)}};
        return std::move(*init);
      }
    }
    throw Error("unhandled stage");
  }();

  save_checkpoint(ckpt, a.common.out);
  const std::string hash = file_hash(a.common.out);
  lineage.push_back({{"stage", stage_name(ckpt.stage)}, {"checkpoint", a.common.out}, {"hash", hash}});
  m["lineage"] = lineage;
  m["outputs"]["checkpoint"] = {{"path", a.common.out}, {"hash", hash},
                                {"stage", stage_name(ckpt.stage)}};
  write_manifest(a.common.out, m);
  std::printf("wrote %s checkpoint %s\n", std::string(stage_name(ckpt.stage)).c_str(),
              a.common.out.c_str());
  return 0;
}

struct EvalArgs {
  Common common;
  std::string checkpoint;
  std::string baseline;
  std::string corpus;
  std::string table;
  std::string profiles;
  std::string author;
};

EvalReport evaluate(const Checkpoint& ckpt, const ContextSet& set, const StyleScoreTable& table,
                    const LexicalVector& target, const ExperimentConfig& cfg) {
  const auto contexts = encode_contexts(set, ckpt.vocab);
  const StyleLookup lookup(table, ckpt.vocab.words());
  return full_report(ckpt.model, contexts, target, lookup, cfg.eval);
}

int cmd_eval(const EvalArgs& a) {
  const ExperimentConfig cfg = resolve_config(a.common);
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  const StyleScoreTable table = load_score_table(a.table);
  const auto profiles = load_profiles(a.profiles);
  const auto it = profiles.find(a.author);
  if (it == profiles.end()) throw InputError("author '" + a.author + "' not in profiles");
  const auto texts = load_corpus_dir(corpus_root(a.corpus));
  const auto corpora = split_corpora(texts, cfg.corpus, cfg.seed);
  const ContextSet set =
      build_contexts(corpora, cfg.corpus.eval_contexts_per_author,
                     static_cast<std::size_t>(cfg.rl.context_len), cfg.seed, SplitPart::test);
  if (set.contexts.empty()) throw InputError("no evaluation contexts could be built");

  const EvalReport report = evaluate(ckpt, set, table, it->second, cfg);
  io::write_file(a.common.out, format_report(report));
  std::printf("%s", format_table_header().c_str());
  std::optional<EvalReport> base;
  if (!a.baseline.empty()) {
    base = evaluate(load_checkpoint(a.baseline), set, table, it->second, cfg);
    std::printf("%s", format_table_row("baseline", *base).c_str());
  }
  std::printf("%s", format_table_row(stage_name(ckpt.stage), report).c_str());
  if (base)
    std::printf("overall_abs change %+.2f%%, perplexity change %+.2f%%\n",
                100.0 * (report.abs.overall - base->abs.overall) / base->abs.overall,
                100.0 * (report.perplexity - base->perplexity) / base->perplexity);

  json m = base_manifest("eval", cfg);
  m["author"] = a.author;
  m["inputs"] = {{"checkpoint", {{"path", a.checkpoint}, {"hash", file_hash(a.checkpoint)}}},
                 {"corpus", corpus_hashes(texts)},
                 {"score_table", file_hash(a.table)},
                 {"profiles", file_hash(a.profiles)}};
  m["lineage"] = read_lineage(a.checkpoint);
  if (base) {
    m["inputs"]["baseline"] = {{"path", a.baseline}, {"hash", file_hash(a.baseline)}};
    m["baseline_report"] = {{"overall_abs", io::fixed6(base->abs.overall)},
                            {"perplexity", io::fixed6(base->perplexity)}};
  }
  m["outputs"] = {{"report", a.common.out}, {"hash", file_hash(a.common.out)}};
  write_manifest(a.common.out, m);
  return 0;
}

struct SampleArgs {
  Common common;
  std::string checkpoint;
  std::string prompt;
  int length = 100;
  std::string mode = "nucleus";
  double p = 0.9;
};

int cmd_sample(const SampleArgs& a) {
  const ExperimentConfig cfg = resolve_config(a.common);
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  const auto mode = parse_sampling_mode(a.mode);
  if (!mode) throw InputError("unknown sampling mode '" + a.mode + "'");
  SamplerConfig sampler{*mode, a.p, cfg.seed};
  std::vector<int> prompt = ckpt.vocab.encode(tokenize(a.prompt));
  if (prompt.empty()) throw InputError("prompt has no word tokens");
  if (a.length < 1) throw InputError("--length must be >= 1");
  const auto max_len = static_cast<std::size_t>(ckpt.model.config().max_seq_len);
  if (prompt.size() + static_cast<std::size_t>(a.length) > max_len)
    throw InputError("prompt plus length exceeds the model's max_seq_len");
  const std::vector<std::vector<int>> contexts{prompt};
  const auto out = generate_eval_paragraphs(ckpt.model, contexts, sampler, a.length);
  const std::string text = join(ckpt.vocab.decode(out.front())) + "\n";
  if (a.common.out.empty())
    std::fputs(text.c_str(), stdout);
  else
    io::write_file(a.common.out, text);
  return 0;
}

void add_common(CLI::App* sub, Common& c, bool out_required) {
  sub->add_option("--config", c.config_path, "JSON experiment config (defaults built in)");
  sub->add_option("--seed", c.seed, "override the config seed");
  auto* out = sub->add_option("--out", c.out, "output path");
  if (out_required) out->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lexstyle: lexical-style steering of a small language model"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s_synth = app.add_subcommand("synth", "write the synthetic planted-style corpus");
  add_common(s_synth, synth.common, true);
  s_synth->add_option("--paragraphs", synth.paragraphs, "paragraphs per author");

  BuildScoresArgs bs;
  auto* s_bs = app.add_subcommand("build-scores", "build the word style score table");
  add_common(s_bs, bs.common, true);
  s_bs->add_option("--corpus", bs.corpus, "co-occurrence corpus file or directory")->required();
  s_bs->add_option("--lexicons", bs.lexicons, "directory of <category>.txt seed lists")->required();

  ProfileArgs pr;
  auto* s_pr = app.add_subcommand("profile", "author style vectors and top-k selection");
  add_common(s_pr, pr.common, true);
  s_pr->add_option("--corpus", pr.corpus, "corpus root (<author>/*.txt)");
  s_pr->add_option("--table", pr.table, "score table")->required();
  s_pr->add_option("--top-k", pr.top_k, "authors to select");
  s_pr->add_option("--split-out", pr.split_out, "also write the train/test split manifest");

  TrainArgs tr;
  auto* s_tr = app.add_subcommand("train", "run one training stage");
  add_common(s_tr, tr.common, true);
  s_tr->add_option("--stage", tr.stage, "pretrain | finetune_global | finetune_author | rl")
      ->required();
  s_tr->add_option("--corpus", tr.corpus, "corpus root (<author>/*.txt)");
  s_tr->add_option("--init", tr.init, "input checkpoint");
  s_tr->add_option("--author", tr.author, "target author");
  s_tr->add_option("--table", tr.table, "score table (rl)");
  s_tr->add_option("--profiles", tr.profiles, "profiles file (rl)");
  s_tr->add_option("--reward-log", tr.reward_log, "reward log path (rl)");
  s_tr->add_option("--max-episodes", tr.max_episodes, "episode budget (rl)");
  s_tr->add_option("--baseline", tr.baseline, "mean_of_n | greedy_scst (rl)");

  EvalArgs ev;
  auto* s_ev = app.add_subcommand("eval", "evaluation report against a target author");
  add_common(s_ev, ev.common, true);
  s_ev->add_option("--checkpoint", ev.checkpoint, "checkpoint to evaluate")->required();
  s_ev->add_option("--baseline", ev.baseline, "second checkpoint to compare against");
  s_ev->add_option("--corpus", ev.corpus, "corpus root (<author>/*.txt)");
  s_ev->add_option("--table", ev.table, "score table")->required();
  s_ev->add_option("--profiles", ev.profiles, "profiles file")->required();
  s_ev->add_option("--author", ev.author, "target author")->required();

  SampleArgs sa;
  auto* s_sa = app.add_subcommand("sample", "generate a continuation of a prompt");
  add_common(s_sa, sa.common, false);
  s_sa->add_option("--checkpoint", sa.checkpoint, "checkpoint")->required();
  s_sa->add_option("--prompt", sa.prompt, "prompt text")->required();
  s_sa->add_option("--length", sa.length, "tokens to generate");
  s_sa->add_option("--mode", sa.mode, "nucleus | greedy | multinomial");
  s_sa->add_option("--p", sa.p, "nucleus mass");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (s_synth->parsed()) return cmd_synth(synth);
    if (s_bs->parsed()) return cmd_build_scores(bs);
    if (s_pr->parsed()) return cmd_profile(pr);
    if (s_tr->parsed()) return cmd_train(tr);
    if (s_ev->parsed()) return cmd_eval(ev);
    if (s_sa->parsed()) return cmd_sample(sa);
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
  return 1;
}
