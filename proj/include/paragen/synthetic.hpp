#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "paragen/corpus.hpp"
#include "paragen/dataset.hpp"
#include "paragen/vocab.hpp"

namespace paragen {

// Identity task: every source mixes tokens from a small closed vocabulary
// with exactly one token that is never in it; the target equals the source.
struct CopyTaskConfig {
  std::size_t pairs = 2000;
  std::size_t vocabulary = 50;
  std::size_t min_length = 3;
  std::size_t max_length = 8;
  std::uint64_t seed = 1;
};

struct CopyTask {
  std::vector<std::string> base_tokens;
  std::vector<SentencePair> pairs;
  std::vector<std::string> oov_tokens;  // one per pair, all distinct
};

CopyTask make_copy_task(const CopyTaskConfig& cfg);
// Held-out split with OOV tokens disjoint from `avoid`.
CopyTask make_copy_task(const CopyTaskConfig& cfg, std::span<const std::string> avoid);

// Closed vocabulary of the task (reserved ids plus base tokens).
Vocabulary copy_task_vocab(const CopyTask& task);

// Documents from several outlets carrying planted near-paraphrase pairs (one
// side each in two different outlets) mixed with unrelated sentences.
struct PlantedCorpusConfig {
  std::size_t planted_pairs = 50;
  std::size_t distractors = 200;
  std::size_t sources = 5;
  std::size_t sentence_length = 10;
  std::size_t substitutions = 2;  // words changed in the paraphrase side
  std::uint64_t seed = 1;
};

struct PlantedCorpus {
  std::vector<Document> documents;
  std::vector<std::pair<std::string, std::string>> plants;
};

PlantedCorpus make_planted_corpus(const PlantedCorpusConfig& cfg);

// Number of planted pairs present (in either order, compared after
// tokenization) among `mined`.
std::size_t planted_hits(std::span<const std::pair<std::string, std::string>> plants,
                         std::span<const SentencePair> mined);

// Gold plants in TSV form, one "x<TAB>y" line each.
std::string format_plants_tsv(std::span<const std::pair<std::string, std::string>> plants);
std::vector<std::pair<std::string, std::string>> parse_plants_tsv(std::string_view text);

} // namespace paragen
