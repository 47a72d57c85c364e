#include "paragen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "paragen/errors.hpp"

namespace paragen {

namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, std::size_t> count_ngrams(const TokenList& tokens, std::size_t n) {
  std::map<Ngram, std::size_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[Ngram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                   tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

} // namespace

BleuReport bleu(std::span<const TokenList> hypotheses, std::span<const TokenList> references,
                bool smoothing, int threads) {
  if (hypotheses.size() != references.size()) {
    throw ValidationError("bleu: " + std::to_string(hypotheses.size()) + " hypotheses but " +
                          std::to_string(references.size()) + " references");
  }
  if (hypotheses.empty()) throw ValidationError("bleu: empty corpus");

  struct Counts {
    std::array<std::size_t, 4> matched{};
    std::array<std::size_t, 4> total{};
  };
  std::vector<Counts> per_sentence(hypotheses.size());
  const auto n_sent = static_cast<std::ptrdiff_t>(hypotheses.size());
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads > 0 ? threads : 1)
  for (std::ptrdiff_t s = 0; s < n_sent; ++s) {
    const TokenList& hyp = hypotheses[static_cast<std::size_t>(s)];
    const TokenList& ref = references[static_cast<std::size_t>(s)];
    Counts& c = per_sentence[static_cast<std::size_t>(s)];
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto hyp_counts = count_ngrams(hyp, n);
      const auto ref_counts = count_ngrams(ref, n);
      for (const auto& [gram, count] : hyp_counts) {
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) c.matched[n - 1] += std::min(count, it->second);
        c.total[n - 1] += count;
      }
    }
  }

  std::array<std::size_t, 4> matched{};
  std::array<std::size_t, 4> total{};
  BleuReport report;
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    report.hypothesis_length += hypotheses[s].size();
    report.reference_length += references[s].size();
    for (std::size_t n = 0; n < 4; ++n) {
      matched[n] += per_sentence[s].matched[n];
      total[n] += per_sentence[s].total[n];
    }
  }

  double log_sum = 0.0;
  bool any_zero = false;
  for (std::size_t n = 0; n < 4; ++n) {
    const double num = static_cast<double>(matched[n]) + (smoothing ? 1.0 : 0.0);
    const double den = static_cast<double>(total[n]) + (smoothing ? 1.0 : 0.0);
    report.precisions[n] = den > 0.0 ? num / den : 0.0;
    if (report.precisions[n] <= 0.0) {
      any_zero = true;
    } else {
      log_sum += std::log(report.precisions[n]);
    }
  }
  const double h = static_cast<double>(report.hypothesis_length);
  const double r = static_cast<double>(report.reference_length);
  report.brevity_penalty = h < r ? (h > 0.0 ? std::exp(1.0 - r / h) : 0.0) : 1.0;
  report.bleu = any_zero ? 0.0 : report.brevity_penalty * std::exp(log_sum / 4.0);
  return report;
}

std::string bleu_to_json(const BleuReport& report) {
  nlohmann::ordered_json j;
  j["bleu"] = report.bleu;
  j["precisions"] = report.precisions;
  j["brevity_penalty"] = report.brevity_penalty;
  j["hypothesis_length"] = report.hypothesis_length;
  j["reference_length"] = report.reference_length;
  return j.dump();
}

} // namespace paragen
