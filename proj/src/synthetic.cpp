#include "paragen/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <unordered_set>

#include "paragen/errors.hpp"
#include "paragen/random.hpp"

namespace paragen {

namespace {

const char* const kOnsets[] = {"b", "c", "d", "f", "g", "l", "m", "n", "p", "r", "s", "t", "v", "z"};
const char* const kVowels[] = {"a", "e", "i", "o", "u"};

std::string pseudo_word(Rng& rng, std::size_t syllables) {
  std::string w;
  for (std::size_t s = 0; s < syllables; ++s) {
    w += kOnsets[rng.below(std::size(kOnsets))];
    w += kVowels[rng.below(std::size(kVowels))];
  }
  return w;
}

// `count` distinct pseudo-words not in `taken`; they are added to it.
std::vector<std::string> fresh_words(Rng& rng, std::size_t count, std::size_t syllables,
                                     std::unordered_set<std::string>& taken) {
  std::vector<std::string> out;
  out.reserve(count);
  while (out.size() < count) {
    std::string w = pseudo_word(rng, syllables);
    if (taken.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

std::string join(const std::vector<std::string>& words) {
  std::string s;
  for (const auto& w : words) {
    if (!s.empty()) s.push_back(' ');
    s += w;
  }
  return s;
}

std::string canonical(std::string_view text) { return join(tokenize(text)); }

} // namespace

CopyTask make_copy_task(const CopyTaskConfig& cfg) { return make_copy_task(cfg, {}); }

CopyTask make_copy_task(const CopyTaskConfig& cfg, std::span<const std::string> avoid) {
  if (cfg.vocabulary == 0 || cfg.min_length == 0 || cfg.min_length > cfg.max_length) {
    throw ValidationError("copy task: need vocabulary >= 1 and 1 <= min_length <= max_length");
  }
  CopyTask task;
  for (std::size_t i = 0; i < cfg.vocabulary; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "w%02zu", i);
    task.base_tokens.emplace_back(buf);
  }
  Rng rng(cfg.seed);
  std::unordered_set<std::string> taken(avoid.begin(), avoid.end());
  task.oov_tokens = fresh_words(rng, cfg.pairs, 4, taken);
  task.pairs.reserve(cfg.pairs);
  for (std::size_t p = 0; p < cfg.pairs; ++p) {
    const std::size_t len = cfg.min_length + rng.below(cfg.max_length - cfg.min_length + 1);
    const std::size_t oov_at = rng.below(len);
    std::vector<std::string> words;
    for (std::size_t i = 0; i < len; ++i) {
      words.push_back(i == oov_at ? task.oov_tokens[p] : task.base_tokens[rng.below(cfg.vocabulary)]);
    }
    const std::string text = join(words);
    task.pairs.push_back({text, text, 1.0, std::nullopt});
  }
  return task;
}

Vocabulary copy_task_vocab(const CopyTask& task) { return Vocabulary(task.base_tokens); }

PlantedCorpus make_planted_corpus(const PlantedCorpusConfig& cfg) {
  if (cfg.sources < 2) throw ValidationError("planted corpus: need at least 2 sources");
  if (cfg.substitutions >= cfg.sentence_length) {
    throw ValidationError("planted corpus: substitutions must be below sentence_length");
  }
  Rng rng(cfg.seed);
  std::unordered_set<std::string> taken;
  // Large pool so unrelated sentences barely overlap.
  const std::vector<std::string> pool = fresh_words(rng, 4000, 3, taken);
  auto sentence = [&] {
    std::vector<std::string> words;
    std::set<std::size_t> used;
    while (words.size() < cfg.sentence_length) {
      const std::size_t w = rng.below(pool.size());
      if (used.insert(w).second) words.push_back(pool[w]);
    }
    return words;
  };
  auto render = [](std::vector<std::string> words) {
    words.front()[0] = static_cast<char>(words.front()[0] - 'a' + 'A');
    return join(words) + ".";
  };

  std::vector<std::vector<std::string>> per_source(cfg.sources);
  PlantedCorpus out;
  for (std::size_t p = 0; p < cfg.planted_pairs; ++p) {
    std::vector<std::string> a = sentence();
    std::vector<std::string> b = a;
    std::set<std::size_t> positions;
    while (positions.size() < cfg.substitutions) positions.insert(rng.below(b.size()));
    for (std::size_t pos : positions) b[pos] = pool[rng.below(pool.size())];
    // Light reordering keeps the bag of words, as a rewording would.
    std::swap(b[0], b[1 + rng.below(b.size() - 1)]);
    const std::size_t sa = rng.below(cfg.sources);
    const std::size_t sb = (sa + 1 + rng.below(cfg.sources - 1)) % cfg.sources;
    std::string ta = render(a), tb = render(b);
    per_source[sa].push_back(ta);
    per_source[sb].push_back(tb);
    out.plants.emplace_back(std::move(ta), std::move(tb));
  }
  for (std::size_t d = 0; d < cfg.distractors; ++d) {
    per_source[rng.below(cfg.sources)].push_back(render(sentence()));
  }

  for (std::size_t s = 0; s < cfg.sources; ++s) {
    auto& sentences = per_source[s];
    rng.shuffle(sentences);
    char source[32];
    std::snprintf(source, sizeof(source), "outlet-%02zu", s);
    const std::size_t per_doc = 6;
    for (std::size_t start = 0, n = 0; start < sentences.size(); start += per_doc, ++n) {
      Document doc;
      char id[64];
      std::snprintf(id, sizeof(id), "%s/article-%03zu", source, n);
      doc.id = id;
      doc.source = source;
      doc.title = "Article " + std::to_string(n);
      const std::size_t end = std::min(sentences.size(), start + per_doc);
      for (std::size_t i = start; i < end; ++i) {
        if (!doc.body.empty()) doc.body.push_back(' ');
        doc.body += sentences[i];
      }
      doc.timestamp = "2024-01-01T00:00:00Z";
      out.documents.push_back(std::move(doc));
    }
  }
  return out;
}

std::size_t planted_hits(std::span<const std::pair<std::string, std::string>> plants,
                         std::span<const SentencePair> mined) {
  std::set<std::pair<std::string, std::string>> found;
  for (const auto& pair : mined) {
    std::string a = canonical(pair.x), b = canonical(pair.y);
    if (b < a) std::swap(a, b);
    found.emplace(std::move(a), std::move(b));
  }
  std::size_t hits = 0;
  for (const auto& [x, y] : plants) {
    std::string a = canonical(x), b = canonical(y);
    if (b < a) std::swap(a, b);
    if (found.count({a, b})) ++hits;
  }
  return hits;
}

std::string format_plants_tsv(std::span<const std::pair<std::string, std::string>> plants) {
  std::string out;
  for (const auto& [x, y] : plants) out += x + "\t" + y + "\n";
  return out;
}

std::vector<std::pair<std::string, std::string>> parse_plants_tsv(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> plants;
  for (const auto& pair : parse_pairs_tsv(text)) plants.emplace_back(pair.x, pair.y);
  return plants;
}

} // namespace paragen
