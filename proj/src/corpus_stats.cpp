#include "slurg/corpus_stats.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "slurg/errors.hpp"
#include "slurg/hash.hpp"
#include "slurg/utf8.hpp"
#include "stopwords_data.hpp"

namespace slurg {

// ---------------------------------------------------------------- stopwords

StopwordList StopwordList::parse(std::string_view contents, std::string name, std::string version) {
    StopwordList list;
    list.name = std::move(name);
    list.version = std::move(version);
    list.sha256 = sha256_hex(contents);
    std::istringstream in{std::string(contents)};
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        list.words.insert(line);
    }
    return list;
}

StopwordList StopwordList::english() {
    static const StopwordList list = parse(detail::kEnglishStopwordsV1, "english", "v1");
    return list;
}

StopwordList StopwordList::none() {
    StopwordList list;
    list.name = "none";
    list.version = "v1";
    list.sha256 = sha256_hex("");
    return list;
}

StopwordList StopwordList::from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open stopword list '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.stem().string(), "file");
}

// --------------------------------------------------------------- tokenizing

namespace {

bool is_word_char(char32_t c) noexcept {
    if (c < 0x80)
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
    if (c <= 0xBF || c == 0xD7 || c == 0xF7) return false;
    if (c >= 0x2000 && c <= 0x2BFF) return false;  // punctuation, arrows, symbols
    if (c >= 0x3000 && c <= 0x303F) return false;
    if (c >= 0xFE30 && c <= 0xFE4F) return false;
    if (c >= 0xFF01 && c <= 0xFF0F) return false;
    if (c >= 0x1F000 && c <= 0x1FAFF) return false;  // emoji
    if (c == 0xFFFD) return false;
    return true;
}

bool is_space(char32_t c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v' || c == 0xA0 ||
           (c >= 0x2000 && c <= 0x200B) || c == 0x3000;
}

char32_t lower(char32_t c) noexcept {
    if (c >= 'A' && c <= 'Z') return c + 32;
    if (c >= 0x0410 && c <= 0x042F) return c + 0x20;
    if (c >= 0x0400 && c <= 0x040F) return c + 0x50;
    return c;
}

// Word runs plus, when `with_punct` is set, single punctuation characters.
std::vector<std::string> scan(std::string_view text, bool lowercase, bool with_punct) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) out.push_back(std::move(current));
        current.clear();
    };
    for (std::size_t pos = 0, w = 0; pos < text.size(); pos += w) {
        char32_t c = utf8::decode_at(text, pos, w);
        if (is_word_char(c)) {
            utf8::append(current, lowercase ? lower(c) : c);
            continue;
        }
        flush();
        if (with_punct && !is_space(c)) out.emplace_back(text.substr(pos, w));
    }
    flush();
    return out;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, bool lowercase) {
    return scan(text, lowercase, false);
}

std::vector<std::string> content_tokens(std::string_view text, const TokenizerConfig& config) {
    auto tokens = tokenize(text, config.lowercase);
    std::erase_if(tokens, [&](const std::string& t) { return config.stopwords.contains(t); });
    return tokens;
}

std::vector<std::string> split_sentences(std::string_view text) {
    const auto cps = utf8::decode(text);
    const auto bounds = utf8::boundaries(text);
    std::vector<std::string> out;
    auto push = [&](std::size_t b, std::size_t e) {
        while (b < e && is_space(cps[b])) ++b;
        while (e > b && is_space(cps[e - 1])) --e;
        if (b < e) out.emplace_back(text.substr(bounds[b], bounds[e] - bounds[b]));
    };
    std::size_t begin = 0;
    for (std::size_t i = 0; i < cps.size();) {
        const char32_t c = cps[i];
        if (c != '.' && c != '!' && c != '?') {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < cps.size() && (cps[j] == '.' || cps[j] == '!' || cps[j] == '?')) ++j;
        if (j == cps.size() || is_space(cps[j])) {
            push(begin, j);
            begin = j;
        }
        i = j;
    }
    push(begin, cps.size());
    return out;
}

// ---------------------------------------------------------------- frequency

namespace {

std::unordered_map<std::string, std::size_t> count_tokens(const Corpus& corpus,
                                                          const TokenizerConfig& config,
                                                          std::size_t& total) {
    std::unordered_map<std::string, std::size_t> counts;
    total = 0;
    for (const auto& s : corpus.samples)
        for (auto& t : content_tokens(s.text, config)) {
            ++counts[t];
            ++total;
        }
    return counts;
}

}  // namespace

std::vector<TokenCount> token_frequencies(const Corpus& corpus, const TokenizerConfig& config,
                                          std::size_t k) {
    std::size_t total = 0;
    auto counts = count_tokens(corpus, config, total);
    std::vector<TokenCount> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const TokenCount& a, const TokenCount& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

double vocab_diversity(const Corpus& corpus, const TokenizerConfig& config) {
    std::size_t total = 0;
    const auto counts = count_tokens(corpus, config, total);
    if (total == 0) throw EmptyAfterFiltering("no tokens left after stopword removal");
    return static_cast<double>(counts.size()) / static_cast<double>(total);
}

HapaxResult hapax_ratio(const Corpus& corpus, const TokenizerConfig& config) {
    HapaxResult result;
    double sum = 0.0;
    for (const auto& s : corpus.samples) {
        const auto sentences = split_sentences(s.text);
        for (std::size_t i = 0; i < sentences.size(); ++i) {
            const auto tokens = content_tokens(sentences[i], config);
            if (tokens.empty()) continue;
            std::unordered_map<std::string, std::size_t> counts;
            for (const auto& t : tokens) ++counts[t];
            std::size_t hapaxes = 0;
            for (const auto& [t, n] : counts)
                if (n == 1) ++hapaxes;
            SentenceHapax h;
            h.sample_id = s.sample_id;
            h.sentence = i;
            h.tokens = tokens.size();
            h.hapaxes = hapaxes;
            h.ratio = static_cast<double>(hapaxes) / static_cast<double>(tokens.size());
            sum += h.ratio;
            result.per_sentence.push_back(std::move(h));
        }
    }
    if (!result.per_sentence.empty())
        result.mean = sum / static_cast<double>(result.per_sentence.size());
    return result;
}

// ------------------------------------------------------------- POS tagging

PosSidecar read_pos_sidecar(std::istream& in) {
    PosSidecar sidecar;
    std::vector<PosSentence>* current = nullptr;
    PosSentence sentence;
    auto end_sentence = [&] {
        if (current && !sentence.empty()) current->push_back(std::move(sentence));
        sentence.clear();
    };
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            end_sentence();
            continue;
        }
        if (line.front() == '#') {
            end_sentence();
            auto id = line.substr(1);
            id.erase(0, id.find_first_not_of(" \t"));
            if (id.empty()) throw SchemaViolation(line_no, "sample header without an id");
            current = &sidecar[id];
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string::npos || !current)
            throw SchemaViolation(line_no, "expected 'token<TAB>POS' inside a '# sample_id' block");
        sentence.push_back({line.substr(0, tab), line.substr(tab + 1)});
    }
    end_sentence();
    return sidecar;
}

PosSidecar read_pos_sidecar(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open POS sidecar '" + path.string() + "'");
    return read_pos_sidecar(in);
}

namespace {

const std::unordered_map<std::string, std::string>& closed_class() {
    static const std::unordered_map<std::string, std::string> lexicon = [] {
        std::unordered_map<std::string, std::string> m;
        auto add = [&](std::initializer_list<const char*> words, const char* tag) {
            for (const char* w : words) m.emplace(w, tag);
        };
        add({"the", "a", "an", "this", "that", "these", "those", "every", "each", "some", "any", "no",
             "another", "all", "both", "either", "neither"},
            "DT");
        add({"i", "you", "he", "she", "it", "we", "they", "me", "him", "us", "them", "myself",
             "yourself", "himself", "herself", "itself", "ourselves", "themselves", "everyone",
             "everybody", "someone", "somebody", "nobody", "anyone", "anybody", "everything",
             "something", "nothing", "anything"},
            "PRP");
        add({"my", "your", "his", "her", "its", "our", "their"}, "PRP$");
        add({"of", "in", "on", "at", "by", "for", "with", "about", "against", "between", "into",
             "through", "during", "before", "after", "above", "below", "from", "up", "down", "over",
             "under", "around", "across", "along", "among", "behind", "beyond", "near", "toward",
             "towards", "upon", "within", "without", "via", "like", "than", "since", "until", "off",
             "out"},
            "IN");
        add({"because", "although", "though", "if", "unless", "whereas", "whether", "while"}, "IN");
        add({"to"}, "TO");
        add({"who", "whom", "what"}, "WP");
        add({"which"}, "WDT");
        add({"when", "where", "why", "how"}, "WRB");
        add({"and", "or", "but", "nor", "so", "yet"}, "CC");
        add({"can", "could", "will", "would", "shall", "should", "may", "might", "must"}, "MD");
        add({"is", "am", "are", "was", "were", "be", "been", "being", "has", "have", "had", "do",
             "does", "did", "get", "gets", "got", "go", "goes", "went", "gone", "make", "makes",
             "made", "take", "takes", "took", "say", "says", "said", "know", "knows", "knew",
             "think", "thinks", "thought", "want", "wants", "need", "needs", "see", "sees", "saw",
             "come", "comes", "came", "give", "gives", "gave", "tell", "tells", "told", "ran",
             "run", "runs", "fight", "fights", "fought", "kill", "kills", "win", "wins", "won",
             "lose", "loses", "lost", "die", "dies", "send", "sends", "sent", "keep", "keeps",
             "kept", "let", "lets", "seem", "seems", "believe", "believes", "hate", "hates",
             "love", "loves", "stop", "stops", "start", "starts", "help", "helps", "try", "tries",
             "put", "puts", "leave", "leaves", "left", "hold", "holds", "held", "bring", "brings",
             "brought", "pay", "pays", "paid", "buy", "buys", "bought", "invade", "invades",
             "bomb", "bombs", "shoot", "shoots", "shot", "lie", "lies", "lied", "care", "cares",
             "blame", "blames", "deserve", "deserves"},
            "VB");
        add({"not", "never", "very", "too", "also", "just", "really", "still", "already", "always",
             "only", "even", "now", "then", "here", "there", "again", "ever", "soon", "probably",
             "literally", "actually", "maybe"},
            "RB");
        return m;
    }();
    return lexicon;
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() > suffix.size() + 1 && s.substr(s.size() - suffix.size()) == suffix;
}

std::string guess_open_class(const std::string& lower_word, bool capitalized, bool sentence_initial) {
    if (std::all_of(lower_word.begin(), lower_word.end(), [](char c) { return c >= '0' && c <= '9'; }))
        return "CD";
    if (ends_with(lower_word, "ly")) return "RB";
    if (ends_with(lower_word, "ing")) return "VBG";
    if (ends_with(lower_word, "ed")) return "VBD";
    for (const char* suf : {"ous", "ful", "ive", "able", "ible", "al", "ic", "less", "ish"})
        if (ends_with(lower_word, suf)) return "JJ";
    if (capitalized && !sentence_initial) return "NNP";
    if (ends_with(lower_word, "s")) return "NNS";
    return "NN";
}

enum class Coarse { Det, Adj, Noun, Prep, Verb, Adv, Sub, Other };

const std::unordered_set<std::string>& subordinators() {
    static const std::unordered_set<std::string> words{"because", "although", "though", "if",
                                                       "unless", "that", "whereas", "whether", "while"};
    return words;
}

Coarse coarse(const TaggedToken& t) {
    const auto& p = t.pos;
    if (p == "DT" || p == "PDT" || p == "PRP$" || p == "WP$") return Coarse::Det;
    if (p.rfind("JJ", 0) == 0 || p == "CD") return Coarse::Adj;
    if (p.rfind("NN", 0) == 0 || p == "PRP" || p == "EX") return Coarse::Noun;
    if (p == "IN") {
        std::string w = t.token;
        for (auto& c : w)
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
        return subordinators().count(w) ? Coarse::Sub : Coarse::Prep;
    }
    if (p == "TO") return Coarse::Prep;
    if (p.rfind("VB", 0) == 0 || p == "MD") return Coarse::Verb;
    if (p.rfind("RB", 0) == 0 || p == "RP") return Coarse::Adv;
    if (p == "WDT" || p == "WP" || p == "WRB") return Coarse::Sub;
    return Coarse::Other;
}

// End index of an NP starting at i, or i when none starts there.
std::size_t match_np(const std::vector<Coarse>& c, std::size_t i) {
    std::size_t j = i;
    if (j < c.size() && c[j] == Coarse::Det) ++j;
    while (j < c.size() && c[j] == Coarse::Adj) ++j;
    if (j >= c.size() || c[j] != Coarse::Noun) return i;
    while (j < c.size() && c[j] == Coarse::Noun) ++j;
    return j;
}

}  // namespace

std::vector<PosSentence> naive_pos_tag(std::string_view text) {
    std::vector<PosSentence> out;
    for (const auto& sentence : split_sentences(text)) {
        PosSentence tagged;
        const auto tokens = scan(sentence, false, true);
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            const auto& tok = tokens[i];
            const char32_t first = utf8::decode(tok).front();
            if (!is_word_char(first)) {
                tagged.push_back({tok, (tok == "!" || tok == "?") ? "." : tok});
                continue;
            }
            std::string lw = tokenize(tok, true).front();
            if (auto it = closed_class().find(lw); it != closed_class().end()) {
                tagged.push_back({tok, it->second});
                continue;
            }
            const bool capitalized = first >= 'A' && first <= 'Z';
            std::string tag = guess_open_class(lw, capitalized, tagged.empty());
            // An unknown word right after a pronoun, modal or infinitival "to"
            // is most often a verb.
            if (!tagged.empty() && (tag == "NN" || tag == "NNS")) {
                const auto& prev = tagged.back().pos;
                if (prev == "PRP" || prev == "MD" || prev == "TO") tag = "VB";
            }
            tagged.push_back({tok, tag});
        }
        if (!tagged.empty()) out.push_back(std::move(tagged));
    }
    return out;
}

std::string_view to_string(PhraseType t) noexcept {
    switch (t) {
        case PhraseType::NP: return "NP";
        case PhraseType::VP: return "VP";
        case PhraseType::PP: return "PP";
        case PhraseType::SBAR: return "SBAR";
    }
    return "";
}

std::vector<PhraseType> chunk(const PosSentence& sentence) {
    std::vector<Coarse> c;
    c.reserve(sentence.size());
    for (const auto& t : sentence) c.push_back(coarse(t));

    std::vector<PhraseType> out;
    std::size_t i = 0;
    while (i < c.size()) {
        switch (c[i]) {
            case Coarse::Sub: {
                const bool clause_start =
                    i + 1 < c.size() && (match_np(c, i + 1) > i + 1 || c[i + 1] == Coarse::Verb);
                if (clause_start) out.push_back(PhraseType::SBAR);
                ++i;
                break;
            }
            case Coarse::Prep: {
                const std::size_t end = match_np(c, i + 1);
                if (end > i + 1) {
                    out.push_back(PhraseType::PP);
                    i = end;
                } else {
                    ++i;
                }
                break;
            }
            case Coarse::Det:
            case Coarse::Adj:
            case Coarse::Noun: {
                const std::size_t end = match_np(c, i);
                if (end > i) {
                    out.push_back(PhraseType::NP);
                    i = end;
                } else {
                    ++i;
                }
                break;
            }
            case Coarse::Verb: {
                std::size_t j = i + 1;
                while (j < c.size() && (c[j] == Coarse::Verb || c[j] == Coarse::Adv)) ++j;
                if (std::size_t end = match_np(c, j); end > j) {
                    j = end;
                } else if (j < c.size() && c[j] == Coarse::Prep) {
                    if (std::size_t pend = match_np(c, j + 1); pend > j + 1) j = pend;
                }
                out.push_back(PhraseType::VP);
                i = j;
                break;
            }
            default:
                ++i;
        }
    }
    return out;
}

PhraseDistribution phrase_distribution(const std::vector<std::vector<PosSentence>>& parsed_corpus) {
    PhraseDistribution d;
    for (const auto& sample : parsed_corpus)
        for (const auto& sentence : sample)
            for (PhraseType t : chunk(sentence)) ++d.counts[static_cast<std::size_t>(t)];
    for (auto n : d.counts) d.total += n;
    if (d.total > 0)
        for (std::size_t i = 0; i < d.counts.size(); ++i)
            d.proportions[i] = static_cast<double>(d.counts[i]) / static_cast<double>(d.total);
    return d;
}

PhraseDistribution phrase_distribution(const Corpus& corpus, const PosSidecar* sidecar,
                                       bool use_tagger) {
    std::vector<std::vector<PosSentence>> parsed;
    parsed.reserve(corpus.size());
    for (const auto& s : corpus.samples) {
        if (sidecar) {
            if (auto it = sidecar->find(s.sample_id); it != sidecar->end()) {
                parsed.push_back(it->second);
                continue;
            }
        }
        if (!use_tagger) throw MissingPos("no POS tags for sample '" + s.sample_id + "'");
        parsed.push_back(naive_pos_tag(s.text));
    }
    return phrase_distribution(parsed);
}

// ------------------------------------------------------------------ report

StatsReport compute_stats(const Corpus& corpus, const TokenizerConfig& config, std::size_t k,
                          const PosSidecar* sidecar, bool use_tagger) {
    StatsReport r;
    r.stopwords_name = config.stopwords.name + "-" + config.stopwords.version;
    r.stopwords_sha256 = config.stopwords.sha256;
    r.top_k = token_frequencies(corpus, config, k);
    for (const auto& s : corpus.samples) r.total_tokens += content_tokens(s.text, config).size();
    if (r.total_tokens > 0) r.vocab_diversity = vocab_diversity(corpus, config);
    r.hapax = hapax_ratio(corpus, config);
    r.phrase_dist = phrase_distribution(corpus, sidecar, use_tagger);
    return r;
}

nlohmann::ordered_json StatsReport::to_json() const {
    nlohmann::ordered_json j;
    j["stopwords"] = {{"list", stopwords_name}, {"sha256", stopwords_sha256}};
    j["total_tokens"] = total_tokens;
    auto top = nlohmann::ordered_json::array();
    for (const auto& [tok, n] : top_k) top.push_back({{"token", tok}, {"count", n}});
    j["top_k"] = std::move(top);
    j["vocab_diversity"] = vocab_diversity ? nlohmann::ordered_json(*vocab_diversity)
                                           : nlohmann::ordered_json(nullptr);
    nlohmann::ordered_json hj;
    hj["mean"] = hapax.mean ? nlohmann::ordered_json(*hapax.mean) : nlohmann::ordered_json(nullptr);
    hj["sentences"] = hapax.per_sentence.size();
    auto per = nlohmann::ordered_json::array();
    for (const auto& h : hapax.per_sentence) per.push_back(h.ratio);
    hj["per_sentence"] = std::move(per);
    j["hapax"] = std::move(hj);
    nlohmann::ordered_json pd, pc;
    for (PhraseType t : kPhraseTypes) {
        pd[std::string(to_string(t))] = phrase_dist.proportions[static_cast<std::size_t>(t)];
        pc[std::string(to_string(t))] = phrase_dist.counts[static_cast<std::size_t>(t)];
    }
    j["phrase_dist"] = std::move(pd);
    j["phrase_counts"] = std::move(pc);
    return j;
}

std::string StatsReport::hapax_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "sample_id,sentence,tokens,hapaxes,ratio\n";
    for (const auto& h : hapax.per_sentence)
        os << h.sample_id << ',' << h.sentence << ',' << h.tokens << ',' << h.hapaxes << ',' << h.ratio
           << '\n';
    return os.str();
}

std::string StatsReport::phrase_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "phrase,count,proportion\n";
    for (PhraseType t : kPhraseTypes) {
        const auto i = static_cast<std::size_t>(t);
        os << to_string(t) << ',' << phrase_dist.counts[i] << ',' << phrase_dist.proportions[i] << '\n';
    }
    return os.str();
}

}  // namespace slurg
