// SPDX-License-Identifier: Apache-2.0

#include "lexstyle/evaluator.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "lexstyle/decoder.hpp"
#include "lexstyle/error.hpp"
#include "lexstyle/io.hpp"
#include "lexstyle/language_model.hpp"
#include "lexstyle/rl_trainer.hpp"
#include "lexstyle/rng.hpp"

namespace lexstyle {

std::vector<std::vector<int>> generate_eval_paragraphs(const Transformer& model,
                                                       std::span<const std::vector<int>> contexts,
                                                       const SamplerConfig& sampler, int length) {
  if (length < 1) throw InputError("generation length must be >= 1");
  sampler.validate();
  std::vector<std::vector<int>> out;
  out.reserve(contexts.size());
  for (std::size_t k = 0; k < contexts.size(); ++k) {
    Rng rng(derive_seed(sampler.seed, k));
    IncrementalDecoder decoder(model, contexts[k], 1);
    std::vector<int> para;
    para.reserve(static_cast<std::size_t>(length));
    for (int t = 0; t < length; ++t) {
      const int tok = sample(decoder.distribution(0), sampler, rng);
      para.push_back(tok);
      if (t + 1 < length) decoder.advance(std::span<const int>(&tok, 1));
    }
    out.push_back(std::move(para));
  }
  return out;
}

ErrorSummary abs_errors(std::span<const LexicalVector> sequences, const LexicalVector& target) {
  if (sequences.empty()) throw InputError("abs_errors needs at least one vector");
  ErrorSummary out;
  for (const LexicalVector& v : sequences) {
    for (std::size_t c = 0; c < kNumCategories; ++c)
      out.per_category[c] += std::abs(v.values[c] - target.values[c]);
    out.overall += lexical_rmse(v, target);
  }
  const double n = static_cast<double>(sequences.size());
  for (double& x : out.per_category) x /= n;
  out.overall /= n;
  return out;
}

std::array<int, kNumCategories> rank_components(const LexicalVector& v) {
  std::array<int, kNumCategories> rank{};
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    int above = 0;
    for (std::size_t o = 0; o < kNumCategories; ++o)
      if (v.values[o] > v.values[c] || (v.values[o] == v.values[c] && o < c)) ++above;
    rank[c] = above + 1;
  }
  return rank;
}

ErrorSummary relative_order_errors(std::span<const LexicalVector> sequences,
                                   const LexicalVector& target) {
  if (sequences.empty()) throw InputError("relative_order_errors needs at least one vector");
  const auto target_rank = rank_components(target);
  ErrorSummary out;
  for (const LexicalVector& v : sequences) {
    const auto rank = rank_components(v);
    int total = 0;
    for (std::size_t c = 0; c < kNumCategories; ++c) {
      const int d = std::abs(rank[c] - target_rank[c]);
      out.per_category[c] += d;
      total += d;
    }
    out.overall += static_cast<double>(total) / 18.0;
  }
  const double n = static_cast<double>(sequences.size());
  for (double& x : out.per_category) x /= n;
  out.overall /= n;
  return out;
}

EvalReport build_report(std::span<const LexicalVector> sequences, const LexicalVector& target,
                        double perplexity) {
  EvalReport r;
  r.abs = abs_errors(sequences, target);
  r.rel = relative_order_errors(sequences, target);
  r.perplexity = perplexity;
  r.paragraphs = sequences.size();
  return r;
}

EvalReport full_report(const Transformer& model, std::span<const std::vector<int>> contexts,
                       const LexicalVector& target, const StyleLookup& lookup,
                       const EvalOptions& options) {
  if (contexts.empty()) throw InputError("evaluation needs at least one context");
  const auto paragraphs = generate_eval_paragraphs(model, contexts, options.sampler, options.length);
  std::vector<LexicalVector> vectors;
  vectors.reserve(paragraphs.size());
  std::string ids;
  for (const auto& p : paragraphs) {
    vectors.push_back(lookup.fraction_vector(p, VectorRole::sequence));
    for (int t : p) ids += std::to_string(t) + ' ';
    ids += '\n';
  }
  EvalReport r = build_report(vectors, target, perplexity(model, contexts));
  r.generation_hash = io::hex64(io::fnv1a(ids));
  return r;
}

EvalReport average_reports(std::span<const EvalReport> reports) {
  if (reports.empty()) throw InputError("no reports to average");
  EvalReport out;
  const double n = static_cast<double>(reports.size());
  std::string hashes;
  for (const EvalReport& r : reports) {
    for (std::size_t c = 0; c < kNumCategories; ++c) {
      out.abs.per_category[c] += r.abs.per_category[c] / n;
      out.rel.per_category[c] += r.rel.per_category[c] / n;
    }
    out.abs.overall += r.abs.overall / n;
    out.rel.overall += r.rel.overall / n;
    out.perplexity += r.perplexity / n;
    out.paragraphs += r.paragraphs;
    hashes += r.generation_hash;
  }
  out.generation_hash = io::hex64(io::fnv1a(hashes));
  return out;
}

std::string format_report(const EvalReport& r) {
  std::string out(kReportMagic);
  out.push_back('\n');
  for (StyleCategory c : kAllCategories)
    out += "abs." + std::string(category_name(c)) + '=' + io::fixed6(r.abs.per_category[index_of(c)]) +
           '\n';
  for (StyleCategory c : kAllCategories)
    out += "rel." + std::string(category_name(c)) + '=' + io::fixed6(r.rel.per_category[index_of(c)]) +
           '\n';
  out += "overall_abs=" + io::fixed6(r.abs.overall) + '\n';
  out += "overall_rel=" + io::fixed6(r.rel.overall) + '\n';
  out += "perplexity=" + io::fixed6(r.perplexity) + '\n';
  out += "paragraphs=" + std::to_string(r.paragraphs) + '\n';
  out += "generation_hash=" + r.generation_hash + '\n';
  return out;
}

EvalReport parse_report(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kReportMagic) throw InputError("not a lexstyle report");
  std::map<std::string, std::string> kv;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError("report line without '=': " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto num = [&](const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw InputError("report is missing " + key);
    return std::stod(it->second);
  };
  EvalReport r;
  for (StyleCategory c : kAllCategories) {
    r.abs.per_category[index_of(c)] = num("abs." + std::string(category_name(c)));
    r.rel.per_category[index_of(c)] = num("rel." + std::string(category_name(c)));
  }
  r.abs.overall = num("overall_abs");
  r.rel.overall = num("overall_rel");
  r.perplexity = num("perplexity");
  r.paragraphs = static_cast<std::size_t>(num("paragraphs"));
  if (kv.count("generation_hash")) r.generation_hash = kv["generation_hash"];
  return r;
}

std::string format_table_header() {
  std::string out = "model               ";
  for (StyleCategory c : kAllCategories) {
    char buf[32];
    std::snprintf(buf, sizeof buf, " %-13.13s", std::string(category_name(c)).c_str());
    out += buf;
  }
  out += " overall        perplexity\n";
  out += "                    ";
  for (std::size_t i = 0; i <= kNumCategories; ++i) out += " abs    rel   ";
  out += '\n';
  return out;
}

std::string format_table_row(std::string_view label, const EvalReport& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-20.20s", std::string(label).c_str());
  std::string out = buf;
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    std::snprintf(buf, sizeof buf, " %.3f  %.2f ", r.abs.per_category[c], r.rel.per_category[c]);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, " %.3f  %.3f  %.2f\n", r.abs.overall, r.rel.overall, r.perplexity);
  out += buf;
  return out;
}

}  // namespace lexstyle
