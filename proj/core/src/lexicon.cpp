#include "nts/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "nts/error.hpp"
#include "text_util.hpp"

namespace nts {

using detail::lines;
using detail::split;
using detail::split_ws;
using detail::trim;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

const char* kOnes[] = {"zero",    "one",     "two",       "three",    "four",    "five",    "six",
                       "seven",   "eight",   "nine",      "ten",      "eleven",  "twelve",  "thirteen",
                       "fourteen", "fifteen", "sixteen",  "seventeen", "eighteen", "nineteen"};
const char* kTens[] = {"", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"};

void below_thousand(std::uint64_t n, std::vector<std::string>& out) {
  if (n >= 100) {
    out.emplace_back(kOnes[n / 100]);
    out.emplace_back("hundred");
    n %= 100;
    if (n == 0) return;
  }
  if (n >= 20) {
    out.emplace_back(kTens[n / 10]);
    if (n % 10) out.emplace_back(kOnes[n % 10]);
  } else {
    out.emplace_back(kOnes[n]);
  }
}

bool is_terminal(std::string_view t) { return t == "." || t == "!" || t == "?"; }

}  // namespace

std::vector<std::string> number_words(std::uint64_t n) {
  std::vector<std::string> out;
  if (n >= 1'000'000'000ULL) {
    // Too long to read as a quantity; spell the digits.
    for (char c : std::to_string(n)) out.emplace_back(kOnes[c - '0']);
    return out;
  }
  if (n == 0) return {"zero"};
  if (n >= 1'000'000) {
    below_thousand(n / 1'000'000, out);
    out.emplace_back("million");
    n %= 1'000'000;
  }
  if (n >= 1000) {
    below_thousand(n / 1000, out);
    out.emplace_back("thousand");
    n %= 1000;
  }
  if (n) below_thousand(n, out);
  return out;
}

bool is_punctuation(std::string_view t) {
  return t == "." || t == "!" || t == "?" || t == "," || t == ";" || t == ":";
}

std::vector<Sentence> tokenize(std::string_view text) {
  std::vector<Sentence> out;
  Sentence cur;
  auto close = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (std::isalpha(c) || c == '\'') {
      std::string word;
      while (i < text.size() && (std::isalpha(static_cast<unsigned char>(text[i])) || text[i] == '\'')) {
        word += static_cast<char>(std::tolower(static_cast<unsigned char>(text[i])));
        ++i;
      }
      const auto b = word.find_first_not_of('\'');
      if (b == std::string::npos) continue;
      word = word.substr(b, word.find_last_not_of('\'') - b + 1);
      cur.push_back(std::move(word));
    } else if (std::isdigit(c)) {
      std::string digits;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) digits += text[i++];
      if (digits.size() > 18) {
        for (char d : digits) cur.emplace_back(kOnes[d - '0']);
      } else {
        for (auto& w : number_words(std::stoull(digits))) cur.push_back(std::move(w));
      }
    } else if (c == '.' || c == '!' || c == '?') {
      if (!cur.empty() && !is_terminal(cur.back())) {
        cur.emplace_back(1, static_cast<char>(c));
        close();
      }
      ++i;
    } else if (c == ',' || c == ';' || c == ':') {
      if (!cur.empty() && !is_punctuation(cur.back())) cur.emplace_back(1, static_cast<char>(c));
      ++i;
    } else {
      ++i;
    }
  }
  close();
  return out;
}

std::string render(const std::vector<Sentence>& sentences) {
  std::string out;
  for (const auto& s : sentences)
    for (const auto& t : s) {
      if (!out.empty()) out += ' ';
      out += t;
    }
  return out;
}

// ---------------------------------------------------------------------------

Lexicon Lexicon::parse(std::string_view text, const FeatureSystem& fs, const std::string& source) {
  Lexicon lex;
  std::size_t lineno = 0;
  for (auto raw : lines(text)) {
    ++lineno;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 3) throw ParseError(source, lineno, "expected 3 tab-separated fields");
    const std::string orth(trim(cols[0]));
    if (orth.empty()) throw ParseError(source, lineno, "empty orthography");
    std::vector<std::string> tags;
    for (auto t : split(cols[1], ',')) {
      auto tt = trim(t);
      if (tt.empty()) throw ParseError(source, lineno, "empty POS tag");
      tags.emplace_back(tt);
    }
    std::vector<Syllable> pron;
    try {
      pron = parse_pronunciation(cols[2], &fs);
      for (const auto& syl : pron)
        for (const auto& p : syl.phones)
          if (!fs.phone(fs.id(p)).lexical) throw InvalidInput("phone '" + p + "' is not in the lexical alphabet");
      lex.add(orth, tags, std::move(pron));
    } catch (const InvalidInput& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path, const FeatureSystem& fs) {
  return parse(detail::read_file(path), fs, path.string());
}

void Lexicon::add(const std::string& orthography, const std::vector<std::string>& tags,
                  std::vector<Syllable> pronunciation) {
  if (tags.empty()) throw InvalidInput("lexicon row for '" + orthography + "' has no POS tag");
  auto& entry = entries_[orthography];
  entry.orthography = orthography;
  for (const auto& t : tags)
    for (const auto& v : entry.variants)
      if (std::find(v.tags.begin(), v.tags.end(), t) != v.tags.end())
        throw InvalidInput("duplicate entry (" + orthography + ", " + t + ")");
  for (auto& v : entry.variants) {
    if (v.pronunciation == pronunciation) {
      v.tags.insert(v.tags.end(), tags.begin(), tags.end());
      return;
    }
  }
  entry.variants.push_back({tags, std::move(pronunciation)});
}

const LexEntry* Lexicon::find(std::string_view orthography) const {
  auto it = entries_.find(orthography);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::string> Lexicon::tags_for(std::string_view orthography) const {
  std::vector<std::string> out;
  if (const auto* e = find(orthography))
    for (const auto& v : e->variants)
      for (const auto& t : v.tags)
        if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  return out;
}

std::optional<std::vector<Syllable>> lookup(std::string_view token, std::string_view tag, const Lexicon& lex) {
  const auto* e = lex.find(token);
  if (!e || e->variants.empty()) return std::nullopt;
  for (const auto& v : e->variants)
    if (std::find(v.tags.begin(), v.tags.end(), tag) != v.tags.end()) return v.pronunciation;
  return e->variants.front().pronunciation;
}

bool is_content_tag(std::string_view tag) {
  return tag == "NN" || tag == "VB" || tag == "JJ" || tag == "RB" || tag == "CD";
}

void annotate_word(Word& word) {
  word.content = is_content_tag(word.pos);
  if (word.pos == "NN" || word.pos == "JJ" || word.pos == "CD") word.prominence = 3;
  else if (word.pos == "VB" || word.pos == "RB") word.prominence = 2;
  else if (word.pos == "PRP" || word.pos == "MD") word.prominence = 1;
  else word.prominence = 0;
  for (auto& syl : word.syllables) syl.pitch_accent = word.content && syl.stress == 1;
}

// ---------------------------------------------------------------------------

std::vector<TaggedSentence> parse_tagged_corpus(std::string_view text, const std::string& source) {
  std::vector<TaggedSentence> out;
  std::size_t lineno = 0;
  for (auto raw : lines(text)) {
    ++lineno;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    TaggedSentence s;
    for (auto item : split_ws(line)) {
      const auto slash = item.rfind('/');
      if (slash == std::string_view::npos || slash == 0 || slash + 1 == item.size())
        throw ParseError(source, lineno, "expected token/TAG, got '" + std::string(item) + "'");
      std::string tok(item.substr(0, slash));
      std::transform(tok.begin(), tok.end(), tok.begin(), [](unsigned char c) { return std::tolower(c); });
      s.emplace_back(std::move(tok), std::string(item.substr(slash + 1)));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TaggedSentence> load_tagged_corpus(const std::filesystem::path& path) {
  return parse_tagged_corpus(detail::read_file(path), path.string());
}

std::optional<std::size_t> TagModel::tag_index(std::string_view tag) const {
  for (std::size_t i = 0; i < tags_.size(); ++i)
    if (tags_[i] == tag) return i;
  return std::nullopt;
}

std::size_t TagModel::add_tag(const std::string& tag) {
  if (auto i = tag_index(tag)) return *i;
  tags_.push_back(tag);
  tag_totals_.push_back(0.0);
  for (auto& row : transitions_) row.push_back(0.0);
  transitions_.emplace_back(tags_.size(), 0.0);
  return tags_.size() - 1;
}

double TagModel::transition_count(std::optional<std::size_t> from, std::size_t to) const {
  return transitions_.at(from ? *from + 1 : 0).at(to);
}

double TagModel::transition_logprob(std::optional<std::size_t> from, std::size_t to) const {
  const auto& row = transitions_.at(from ? *from + 1 : 0);
  double total = 0.0;
  for (double c : row) total += c;
  return std::log((row.at(to) + k_) / (total + k_ * static_cast<double>(tags_.size())));
}

double TagModel::emission_count(std::string_view word, std::size_t tag) const {
  auto it = emissions_.find(word);
  if (it == emissions_.end()) return 0.0;
  auto jt = it->second.find(tag);
  return jt == it->second.end() ? 0.0 : jt->second;
}

std::vector<std::size_t> TagModel::allowed_tags(std::string_view word, const Lexicon* lex) const {
  std::vector<std::size_t> out;
  if (auto it = emissions_.find(word); it != emissions_.end())
    for (const auto& [tag, count] : it->second) out.push_back(tag);
  if (lex)
    for (const auto& t : lex->tags_for(word))
      if (auto i = tag_index(t)) out.push_back(*i);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::size_t> TagModel::open_class_tags() const {
  std::vector<std::size_t> out;
  for (const char* t : {"NN", "VB", "JJ", "RB"})
    if (auto i = tag_index(t)) out.push_back(*i);
  std::sort(out.begin(), out.end());
  if (out.empty())
    for (std::size_t i = 0; i < tags_.size(); ++i) out.push_back(i);
  return out;
}

double TagModel::emission_logprob(std::string_view word, std::size_t tag, const Lexicon* lex) const {
  auto allowed = allowed_tags(word, lex);
  if (allowed.empty()) {
    const auto open = open_class_tags();
    if (std::find(open.begin(), open.end(), tag) == open.end()) return kNegInf;
    return -std::log(static_cast<double>(open.size()));
  }
  if (std::find(allowed.begin(), allowed.end(), tag) == allowed.end()) return kNegInf;
  const double vocab = static_cast<double>(emissions_.size());
  return std::log((emission_count(word, tag) + k_) / (tag_totals_.at(tag) + k_ * (vocab + 1.0)));
}

std::vector<std::string> TagModel::missing_tags(const Lexicon& lex) const {
  std::vector<std::string> out;
  for (const auto& [orth, entry] : lex.entries())
    for (const auto& v : entry.variants)
      for (const auto& t : v.tags)
        if (!tag_index(t) && std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  return out;
}

TagModel train_tagger(const std::vector<TaggedSentence>& corpus, double smoothing) {
  if (corpus.empty()) throw InvalidInput("train_tagger: empty corpus");
  if (!(smoothing > 0.0)) throw InvalidInput("train_tagger: smoothing must be positive");
  TagModel m;
  m.k_ = smoothing;
  m.transitions_.emplace_back();  // start row
  for (const auto& sentence : corpus) {
    std::optional<std::size_t> prev;
    for (const auto& [word, tag] : sentence) {
      const auto t = m.add_tag(tag);
      m.transitions_[prev ? *prev + 1 : 0][t] += 1.0;
      m.emissions_[word][t] += 1.0;
      m.tag_totals_[t] += 1.0;
      prev = t;
    }
  }
  if (m.tags_.empty()) throw InvalidInput("train_tagger: corpus has no tokens");
  return m;
}

std::string TagModel::serialize() const {
  std::ostringstream out;
  out.precision(17);
  out << "nts-tagger 1\n";
  out << "smoothing " << k_ << "\n";
  out << "tags";
  for (const auto& t : tags_) out << ' ' << t;
  out << "\n";
  for (std::size_t r = 0; r < transitions_.size(); ++r)
    for (std::size_t c = 0; c < tags_.size(); ++c)
      if (transitions_[r][c] != 0.0) out << "trans " << (r == 0 ? "<s>" : tags_[r - 1]) << ' ' << tags_[c] << ' ' << transitions_[r][c] << "\n";
  for (const auto& [word, counts] : emissions_)
    for (const auto& [tag, n] : counts) out << "emit " << tags_[tag] << ' ' << word << ' ' << n << "\n";
  return out.str();
}

TagModel TagModel::parse(std::string_view text, const std::string& source) {
  TagModel m;
  m.transitions_.emplace_back();
  std::size_t lineno = 0;
  bool header = false;
  for (auto raw : lines(text)) {
    ++lineno;
    auto f = split_ws(trim(raw));
    if (f.empty()) continue;
    auto need = [&](std::size_t n) {
      if (f.size() != n) throw ParseError(source, lineno, "expected " + std::to_string(n) + " fields");
    };
    auto tag = [&](std::string_view name) {
      auto i = m.tag_index(name);
      if (!i) throw ParseError(source, lineno, "undeclared tag '" + std::string(name) + "'");
      return *i;
    };
    auto number = [&](std::string_view s) {
      try {
        return std::stod(std::string(s));
      } catch (const std::exception&) {
        throw ParseError(source, lineno, "bad number '" + std::string(s) + "'");
      }
    };
    if (f[0] == "nts-tagger") {
      need(2);
      if (f[1] != "1") throw ParseError(source, lineno, "unsupported tagger model version");
      header = true;
    } else if (!header) {
      throw ParseError(source, lineno, "missing 'nts-tagger' header");
    } else if (f[0] == "smoothing") {
      need(2);
      m.k_ = number(f[1]);
    } else if (f[0] == "tags") {
      for (std::size_t i = 1; i < f.size(); ++i) m.add_tag(std::string(f[i]));
    } else if (f[0] == "trans") {
      need(4);
      const std::size_t row = f[1] == "<s>" ? 0 : tag(f[1]) + 1;
      m.transitions_[row][tag(f[2])] = number(f[3]);
    } else if (f[0] == "emit") {
      need(4);
      const auto t = tag(f[1]);
      const double n = number(f[3]);
      m.emissions_[std::string(f[2])][t] = n;
      m.tag_totals_[t] += n;
    } else {
      throw ParseError(source, lineno, "unknown record '" + std::string(f[0]) + "'");
    }
  }
  if (!header || m.tags_.empty()) throw ParseError(source, lineno, "empty tagger model");
  return m;
}

void TagModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << serialize();
}

TagModel TagModel::load(const std::filesystem::path& path) {
  return parse(detail::read_file(path), path.string());
}

std::vector<std::string> pos_tag(const Sentence& tokens, const TagModel& model, const Lexicon* lex) {
  const std::size_t n = tokens.size(), T = model.tags().size();
  if (n == 0) return {};
  std::vector<std::vector<double>> score(n, std::vector<double>(T, kNegInf));
  std::vector<std::vector<std::size_t>> back(n, std::vector<std::size_t>(T, 0));
  for (std::size_t t = 0; t < T; ++t) {
    const double e = model.emission_logprob(tokens[0], t, lex);
    if (e != kNegInf) score[0][t] = model.transition_logprob(std::nullopt, t) + e;
  }
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t t = 0; t < T; ++t) {
      const double e = model.emission_logprob(tokens[i], t, lex);
      if (e == kNegInf) continue;
      for (std::size_t p = 0; p < T; ++p) {
        if (score[i - 1][p] == kNegInf) continue;
        const double s = score[i - 1][p] + model.transition_logprob(p, t) + e;
        if (s > score[i][t]) {
          score[i][t] = s;
          back[i][t] = p;
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t t = 1; t < T; ++t)
    if (score[n - 1][t] > score[n - 1][best]) best = t;
  std::vector<std::string> out(n);
  for (std::size_t i = n; i-- > 0;) {
    out[i] = model.tags()[best];
    best = back[i][best];
  }
  return out;
}

}  // namespace nts
