#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "slurg/span_model.hpp"

namespace slurg {

/// A named, versioned stopword list. The checksum is the SHA-256 of the
/// source file contents and is embedded in every stats report.
struct StopwordList {
    std::string name;
    std::string version;
    std::string sha256;
    std::unordered_set<std::string> words;

    bool contains(const std::string& w) const { return words.count(w) != 0; }

    /// Bundled English list (data/stopwords/english_v1.txt).
    static StopwordList english();
    static StopwordList none();
    /// One word per line; `#` starts a comment line.
    static StopwordList parse(std::string_view contents, std::string name, std::string version);
    static StopwordList from_file(const std::filesystem::path& path);
};

struct TokenizerConfig {
    bool lowercase = true;
    StopwordList stopwords = StopwordList::english();
};

/// Runs of word characters: ASCII letters, digits and `_`, plus non-ASCII
/// letters (symbol and punctuation blocks excluded). Lowercasing covers
/// ASCII and basic Cyrillic.
std::vector<std::string> tokenize(std::string_view text, bool lowercase);

/// Tokens that survive stopword removal.
std::vector<std::string> content_tokens(std::string_view text, const TokenizerConfig& config);

/// Splits after a run of `.`, `!` or `?` that is followed by whitespace or
/// the end of text. Text without a terminator is one sentence.
std::vector<std::string> split_sentences(std::string_view text);

using TokenCount = std::pair<std::string, std::size_t>;

/// Top-k tokens, count descending, ties lexicographic.
std::vector<TokenCount> token_frequencies(const Corpus& corpus, const TokenizerConfig& config,
                                          std::size_t k);

/// Distinct types over total tokens. Throws EmptyAfterFiltering.
double vocab_diversity(const Corpus& corpus, const TokenizerConfig& config);

struct SentenceHapax {
    std::string sample_id;
    std::size_t sentence = 0;
    std::size_t tokens = 0;
    std::size_t hapaxes = 0;
    double ratio = 0.0;
};

struct HapaxResult {
    std::vector<SentenceHapax> per_sentence;
    std::optional<double> mean;  // empty when no sentence kept a token
};

/// Per sentence: tokens occurring once in that sentence over all tokens,
/// after stopword removal. Sentences left without tokens are skipped.
HapaxResult hapax_ratio(const Corpus& corpus, const TokenizerConfig& config);

struct TaggedToken {
    std::string token;
    std::string pos;  // Penn Treebank tag
};

using PosSentence = std::vector<TaggedToken>;
using PosSidecar = std::map<std::string, std::vector<PosSentence>>;  // sample id -> sentences

/// Sidecar TSV: `# <sample_id>` opens a sample, then `token<TAB>POS` lines;
/// a blank line ends a sentence.
PosSidecar read_pos_sidecar(std::istream& in);
PosSidecar read_pos_sidecar(const std::filesystem::path& path);

/// Placeholder tagger: closed-class lexicon, a short list of frequent verbs,
/// suffix rules and a noun default. Punctuation tokens are tagged with
/// themselves. Returns one entry per sentence.
std::vector<PosSentence> naive_pos_tag(std::string_view text);

enum class PhraseType { NP, VP, PP, SBAR };
inline constexpr std::array<PhraseType, 4> kPhraseTypes{PhraseType::NP, PhraseType::VP,
                                                        PhraseType::PP, PhraseType::SBAR};
std::string_view to_string(PhraseType t) noexcept;

/// Non-overlapping chunks found left to right:
///   NP   = DET? ADJ* NOUN+
///   PP   = PREP NP
///   VP   = VERB (VERB|ADV)* then an optional NP or PP, absorbed
///   SBAR = subordinator directly followed by an NP start or a verb; only the
///          subordinator is consumed.
std::vector<PhraseType> chunk(const PosSentence& sentence);

struct PhraseDistribution {
    std::array<std::size_t, 4> counts{};
    std::array<double, 4> proportions{};  // all zero when no chunk was found
    std::size_t total = 0;
};

PhraseDistribution phrase_distribution(const std::vector<std::vector<PosSentence>>& parsed_corpus);

/// Each sample's POS comes from `sidecar` when it has an entry, otherwise
/// from the naive tagger when `use_tagger` is set; otherwise MissingPos.
PhraseDistribution phrase_distribution(const Corpus& corpus, const PosSidecar* sidecar,
                                       bool use_tagger);

struct StatsReport {
    std::vector<TokenCount> top_k;
    std::size_t total_tokens = 0;
    std::optional<double> vocab_diversity;
    HapaxResult hapax;
    PhraseDistribution phrase_dist;
    std::string stopwords_name;
    std::string stopwords_sha256;

    nlohmann::ordered_json to_json() const;
    std::string hapax_csv() const;
    std::string phrase_csv() const;
};

StatsReport compute_stats(const Corpus& corpus, const TokenizerConfig& config, std::size_t k,
                          const PosSidecar* sidecar = nullptr, bool use_tagger = true);

}  // namespace slurg
