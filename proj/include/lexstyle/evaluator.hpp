// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexstyle/sampler.hpp"
#include "lexstyle/style_profile.hpp"
#include "lexstyle/transformer.hpp"

namespace lexstyle {

using CategoryValues = std::array<double, kNumCategories>;

// One continuation of `length` tokens per context; context k samples from
// derive_seed(sampler.seed, k).
std::vector<std::vector<int>> generate_eval_paragraphs(const Transformer& model,
                                                       std::span<const std::vector<int>> contexts,
                                                       const SamplerConfig& sampler, int length);

struct ErrorSummary {
  CategoryValues per_category{};
  double overall = 0.0;
};

// Per category: mean |L_seq[c] - L_tar[c]|. Overall: mean RMSE.
ErrorSummary abs_errors(std::span<const LexicalVector> sequences, const LexicalVector& target);

// Rank 1 = largest component; ties go to the earlier canonical category.
std::array<int, kNumCategories> rank_components(const LexicalVector& v);

// Per category: mean |rank_seq(c) - rank_tar(c)|. Overall: mean of sum/18.
ErrorSummary relative_order_errors(std::span<const LexicalVector> sequences,
                                   const LexicalVector& target);

struct EvalReport {
  ErrorSummary abs;
  ErrorSummary rel;
  double perplexity = 0.0;
  std::size_t paragraphs = 0;
  std::string generation_hash;  // fnv1a over the generated token ids
};

struct EvalOptions {
  SamplerConfig sampler{};
  int length = 100;
};

EvalReport build_report(std::span<const LexicalVector> sequences, const LexicalVector& target,
                        double perplexity);

// Generation, abs/rel errors and context perplexity for one target.
EvalReport full_report(const Transformer& model, std::span<const std::vector<int>> contexts,
                       const LexicalVector& target, const StyleLookup& lookup,
                       const EvalOptions& options);

// Component-wise mean (multi-author runs). Perplexity is averaged too.
EvalReport average_reports(std::span<const EvalReport> reports);

inline constexpr std::string_view kReportMagic = "# lexstyle-report v1";

std::string format_report(const EvalReport& report);
EvalReport parse_report(std::string_view text);

// Header and one row shaped like the evaluation table: abs/rel per category,
// overall abs/rel, perplexity.
std::string format_table_header();
std::string format_table_row(std::string_view label, const EvalReport& report);

}  // namespace lexstyle
