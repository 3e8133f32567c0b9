#include "nts/phonology.hpp"

#include <algorithm>
#include <cctype>

#include "nts/error.hpp"
#include "text_util.hpp"

namespace nts {

using detail::lines;
using detail::split;
using detail::split_ws;
using detail::trim;

FeatureSystem FeatureSystem::parse(std::string_view phones_text, std::string_view letters_text,
                                   const std::string& source) {
  FeatureSystem fs;
  std::unordered_map<std::string, std::size_t> feature_ids;
  std::size_t lineno = 0;
  for (auto raw : lines(phones_text)) {
    ++lineno;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_ws(line);
    if (fields[0] == "features") {
      if (fields.size() != 2) throw ParseError(source, lineno, "expected 'features <list>'");
      if (!fs.feature_names_.empty()) throw ParseError(source, lineno, "duplicate features line");
      for (auto name : split(fields[1], ',')) {
        if (name.empty()) continue;
        if (feature_ids.count(std::string(name))) throw ParseError(source, lineno, "duplicate feature " + std::string(name));
        feature_ids.emplace(std::string(name), fs.feature_names_.size());
        fs.feature_names_.emplace_back(name);
      }
      if (fs.feature_names_.size() > kMaxFeatures) throw ParseError(source, lineno, "too many features");
      continue;
    }
    if (fields.size() != 3) throw ParseError(source, lineno, "expected 3 fields, got " + std::to_string(fields.size()));
    Phone p;
    p.symbol = std::string(fields[0]);
    for (char c : fields[1]) {
      if (c == 'L') p.lexical = true;
      else if (c == 'P') p.postlexical = true;
      else throw ParseError(source, lineno, std::string("unknown membership flag '") + c + "'");
    }
    if (fields[2] != "-") {
      for (auto name : split(fields[2], ',')) {
        auto it = feature_ids.find(std::string(name));
        if (it == feature_ids.end()) throw ParseError(source, lineno, "unknown feature '" + std::string(name) + "'");
        p.features.set(it->second);
      }
    }
    if (fs.index_.count(p.symbol)) throw ParseError(source, lineno, "duplicate phone " + p.symbol);
    const bool deletion = p.symbol == kDeletionSymbol;
    if (!deletion && p.features.none()) throw ParseError(source, lineno, "phone " + p.symbol + " has no features");
    if (deletion && p.lexical) throw ParseError(source, lineno, "deletion symbol cannot be lexical");
    fs.index_.emplace(p.symbol, fs.phones_.size());
    fs.phones_.push_back(std::move(p));
  }
  auto del = fs.find(kDeletionSymbol);
  if (!del) throw ParseError(source, lineno, "inventory lacks the deletion symbol");
  fs.deletion_id_ = *del;
  auto syl = fs.feature_index("syllabic");
  if (!syl) throw ParseError(source, lineno, "feature system lacks 'syllabic'");
  fs.syllabic_feature_ = *syl;

  lineno = 0;
  for (auto raw : lines(letters_text)) {
    ++lineno;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto cols = split(line, '\t');
    if (cols[0] == "letter") {
      if (cols.size() != 3 || cols[1].size() != 1 || cols[1][0] < 'a' || cols[1][0] > 'z')
        throw ParseError(source, lineno, "bad letter line");
      auto& cands = fs.letters_[static_cast<std::size_t>(cols[1][0] - 'a')];
      for (auto sym : split_ws(cols[2])) {
        auto id = fs.find(sym);
        if (!id) throw ParseError(source, lineno, "unknown phone '" + std::string(sym) + "'");
        if (std::find(cands.begin(), cands.end(), *id) == cands.end()) cands.push_back(*id);
      }
    } else if (cols[0] == "composite") {
      auto parts = cols.size() == 3 ? split_ws(cols[2]) : std::vector<std::string_view>{};
      if (parts.size() != 2) throw ParseError(source, lineno, "composite must expand to two phones");
      CompositePhone c;
      c.name = std::string(cols[1]);
      for (std::size_t i = 0; i < 2; ++i) {
        auto id = fs.find(parts[i]);
        if (!id) throw ParseError(source, lineno, "unknown phone '" + std::string(parts[i]) + "'");
        c.phones[i] = *id;
      }
      if (fs.find(c.name)) throw ParseError(source, lineno, "composite name clashes with a phone");
      fs.composites_.push_back(std::move(c));
    } else {
      throw ParseError(source, lineno, "unknown record '" + std::string(cols[0]) + "'");
    }
  }
  for (std::size_t l = 0; l < 26; ++l)
    if (fs.letters_[l].empty())
      throw ParseError(source, lineno, std::string("letter '") + static_cast<char>('a' + l) + "' has no candidates");
  return fs;
}

FeatureSystem FeatureSystem::load(const std::filesystem::path& phones_file,
                                  const std::filesystem::path& letters_file) {
  return parse(detail::read_file(phones_file), detail::read_file(letters_file), phones_file.string());
}

FeatureSystem FeatureSystem::load_dir(const std::filesystem::path& data_dir) {
  return load(data_dir / "phones.txt", data_dir / "letters.txt");
}

std::optional<std::size_t> FeatureSystem::find(std::string_view symbol) const {
  auto it = index_.find(std::string(symbol));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t FeatureSystem::id(std::string_view symbol) const {
  auto id = find(symbol);
  if (!id) throw InvalidInput("unknown phone symbol '" + std::string(symbol) + "'");
  return *id;
}

std::optional<std::size_t> FeatureSystem::feature_index(std::string_view name) const {
  for (std::size_t i = 0; i < feature_names_.size(); ++i)
    if (feature_names_[i] == name) return i;
  return std::nullopt;
}

bool FeatureSystem::has_feature(std::size_t phone_id, std::string_view feature) const {
  auto f = feature_index(feature);
  return f && phones_.at(phone_id).features.test(*f);
}

bool FeatureSystem::is_syllabic(std::size_t phone_id) const {
  return phones_.at(phone_id).features.test(syllabic_feature_);
}

const std::vector<std::size_t>& FeatureSystem::letter_candidates(char letter) const {
  if (letter < 'a' || letter > 'z') throw InvalidInput(std::string("not a lowercase letter: '") + letter + "'");
  return letters_[static_cast<std::size_t>(letter - 'a')];
}

FeatureSystem FeatureSystem::with_letter_candidate(char letter, std::string_view symbol) const {
  FeatureSystem copy = *this;
  auto id = copy.id(symbol);
  letter_candidates(letter);  // range check
  auto& cands = copy.letters_[static_cast<std::size_t>(letter - 'a')];
  if (std::find(cands.begin(), cands.end(), id) == cands.end()) cands.push_back(id);
  return copy;
}

FeatureSet letter_features(char letter, const FeatureSystem& fs) {
  FeatureSet out;
  for (auto id : fs.letter_candidates(letter)) out |= fs.phone(id).features;
  return out;
}

std::size_t phone_encoding_size(const FeatureSystem& fs) { return fs.size() + fs.feature_count(); }

std::vector<double> phone_encoding(std::string_view symbol, const FeatureSystem& fs) {
  const auto id = fs.id(symbol);
  std::vector<double> v(phone_encoding_size(fs), 0.0);
  v[id] = 1.0;
  const auto& f = fs.phone(id).features;
  for (std::size_t k = 0; k < fs.feature_count(); ++k)
    if (f[k]) v[fs.size() + k] = 1.0;
  return v;
}

// ---------------------------------------------------------------------------

std::uint8_t boundary_marks(BoundaryLevel level) {
  std::uint8_t m = 0;
  for (std::size_t l = 0; l <= static_cast<std::size_t>(level); ++l) m |= static_cast<std::uint8_t>(1u << l);
  return m;
}

std::size_t Word::phone_count() const {
  std::size_t n = 0;
  for (const auto& s : syllables) n += s.phones.size();
  return n;
}

std::vector<std::string> Word::phones() const {
  std::vector<std::string> out;
  for (const auto& s : syllables) out.insert(out.end(), s.phones.begin(), s.phones.end());
  return out;
}

std::size_t LinguisticRep::phone_count() const {
  std::size_t n = 0;
  for (const auto& w : words) n += w.phone_count();
  return n;
}

std::vector<PhoneRef> flatten(const LinguisticRep& rep) {
  std::vector<PhoneRef> out;
  out.reserve(rep.phone_count());
  for (std::size_t w = 0; w < rep.words.size(); ++w)
    for (std::size_t s = 0; s < rep.words[w].syllables.size(); ++s)
      for (std::size_t p = 0; p < rep.words[w].syllables[s].phones.size(); ++p) out.push_back({w, s, p});
  return out;
}

const std::string& phone_at(const LinguisticRep& rep, const PhoneRef& ref) {
  return rep.words.at(ref.word).syllables.at(ref.syllable).phones.at(ref.phone);
}

namespace {

void check_structure(const LinguisticRep& rep, std::vector<Violation>& out) {
  static const char* kLevelName[] = {"word", "phrase", "clause", "sentence"};
  for (std::size_t w = 0; w < rep.words.size(); ++w) {
    const auto& word = rep.words[w];
    const std::string wpath = "words[" + std::to_string(w) + "]";
    if (word.syllables.empty()) out.push_back({wpath, "word has no syllables"});
    for (std::size_t s = 0; s < word.syllables.size(); ++s) {
      const auto& syl = word.syllables[s];
      const std::string spath = wpath + ".syllables[" + std::to_string(s) + "]";
      if (syl.phones.empty()) out.push_back({spath, "syllable has no phones"});
      if (syl.nucleus == kNoNucleus) out.push_back({spath, "syllable has no nucleus"});
      else if (syl.nucleus >= syl.phones.size()) out.push_back({spath, "nucleus index out of range"});
      if (syl.stress < 0 || syl.stress > 2) out.push_back({spath, "stress must be 0, 1 or 2"});
    }
    if (word.break_index < 0 || word.break_index > 4) out.push_back({wpath, "break index must be in 0-4"});
    const auto marks = word.boundary_after;
    if (!(marks & kWordBoundary)) out.push_back({wpath, "word end lacks a word boundary"});
    for (std::size_t l = 1; l < kBoundaryLevels; ++l) {
      if ((marks & (1u << l)) && !(marks & (1u << (l - 1))))
        out.push_back({wpath, std::string(kLevelName[l]) + " boundary is not also a " + kLevelName[l - 1] +
                                  " boundary"});
    }
    if (w + 1 == rep.words.size() && !(marks & kSentenceBoundary))
      out.push_back({wpath, "utterance does not end with a sentence boundary"});
  }
}

}  // namespace

std::vector<Violation> validate(const LinguisticRep& rep) {
  std::vector<Violation> out;
  check_structure(rep, out);
  return out;
}

std::vector<Violation> validate(const LinguisticRep& rep, const FeatureSystem& fs) {
  auto out = validate(rep);
  for (std::size_t w = 0; w < rep.words.size(); ++w) {
    for (std::size_t s = 0; s < rep.words[w].syllables.size(); ++s) {
      const auto& syl = rep.words[w].syllables[s];
      for (std::size_t p = 0; p < syl.phones.size(); ++p) {
        auto id = fs.find(syl.phones[p]);
        const std::string path = "words[" + std::to_string(w) + "].syllables[" + std::to_string(s) + "].phones[" +
                                 std::to_string(p) + "]";
        if (!id) out.push_back({path, "unknown phone '" + syl.phones[p] + "'"});
        else if (*id == fs.deletion_id()) out.push_back({path, "deletion symbol inside a pronunciation"});
      }
    }
  }
  return out;
}

BoundaryDistances boundary_distances(const LinguisticRep& rep) {
  const std::size_t n = rep.phone_count();
  BoundaryDistances out(n);
  // Word-level spans in phone indices, then merge per level.
  std::vector<std::size_t> word_start, word_end;  // end exclusive
  std::size_t pos = 0;
  for (const auto& w : rep.words) {
    word_start.push_back(pos);
    pos += w.phone_count();
    word_end.push_back(pos);
  }
  for (std::size_t level = 0; level < kBoundaryLevels; ++level) {
    const auto flag = static_cast<std::uint8_t>(1u << level);
    std::size_t span_first_word = 0;
    for (std::size_t w = 0; w < rep.words.size(); ++w) {
      const bool closes = (rep.words[w].boundary_after & flag) || w + 1 == rep.words.size();
      if (!closes) continue;
      const std::size_t a = word_start[span_first_word], b = word_end[w];
      for (std::size_t i = a; i < b; ++i) {
        out[i].previous[level] = static_cast<int>(i - a);
        out[i].next[level] = static_cast<int>(b - 1 - i);
      }
      span_first_word = w + 1;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Syllable> parse_pronunciation(std::string_view text, const FeatureSystem* fs) {
  std::vector<Syllable> out;
  if (trim(text).empty()) throw InvalidInput("empty pronunciation");
  for (auto syl_text : split(trim(text), '.')) {
    Syllable syl;
    for (auto tok : split(syl_text, '-')) {
      if (tok.empty()) throw InvalidInput("empty phone in pronunciation '" + std::string(text) + "'");
      std::string sym(tok);
      if (std::isdigit(static_cast<unsigned char>(sym.back()))) {
        if (syl.nucleus != kNoNucleus)
          throw InvalidInput("syllable with two stressed phones in '" + std::string(text) + "'");
        syl.stress = sym.back() - '0';
        if (syl.stress > 2) throw InvalidInput("stress digit must be 0-2 in '" + std::string(text) + "'");
        sym.pop_back();
        syl.nucleus = syl.phones.size();
      }
      if (fs && !fs->find(sym)) throw InvalidInput("unknown phone symbol '" + sym + "'");
      syl.phones.push_back(std::move(sym));
    }
    if (syl.nucleus == kNoNucleus)
      throw InvalidInput("syllable without a stress-marked nucleus in '" + std::string(text) + "'");
    out.push_back(std::move(syl));
  }
  return out;
}

std::string format_pronunciation(const std::vector<Syllable>& syllables) {
  std::string out;
  for (std::size_t s = 0; s < syllables.size(); ++s) {
    if (s) out += '.';
    const auto& syl = syllables[s];
    for (std::size_t p = 0; p < syl.phones.size(); ++p) {
      if (p) out += '-';
      out += syl.phones[p];
      if (p == syl.nucleus) out += static_cast<char>('0' + syl.stress);
    }
  }
  return out;
}

namespace {

bool is_liquid_or_glide(std::string_view p) { return p == "l" || p == "r" || p == "w" || p == "y"; }

bool two_consonant_onset(const FeatureSystem& fs, std::string_view a, std::string_view b) {
  if (a == "s") return fs.has_feature(fs.id(b), "stop") || fs.has_feature(fs.id(b), "nasal") || b == "l" || b == "w";
  const auto aid = fs.id(a);
  return is_liquid_or_glide(b) && (fs.has_feature(aid, "stop") || fs.has_feature(aid, "fricative"));
}

}  // namespace

std::vector<Syllable> syllabify(const std::vector<std::string>& phones, const FeatureSystem& fs) {
  std::vector<Syllable> out;
  if (phones.empty()) return out;
  std::vector<std::size_t> nuclei;
  for (std::size_t i = 0; i < phones.size(); ++i)
    if (fs.is_syllabic(fs.id(phones[i]))) nuclei.push_back(i);
  if (nuclei.empty()) {
    // No vowel: the most sonorous phone (first sonorant, else the first) is the nucleus.
    std::size_t nuc = 0;
    for (std::size_t i = 0; i < phones.size(); ++i)
      if (fs.has_feature(fs.id(phones[i]), "sonorant")) {
        nuc = i;
        break;
      }
    nuclei.push_back(nuc);
  }
  std::vector<std::size_t> starts{0};
  for (std::size_t k = 0; k + 1 < nuclei.size(); ++k) {
    const std::size_t a = nuclei[k], b = nuclei[k + 1];
    const std::size_t cluster = b - a - 1;
    std::size_t onset = 0;
    if (cluster >= 1) onset = 1;
    if (cluster >= 2 && two_consonant_onset(fs, phones[b - 2], phones[b - 1])) onset = 2;
    starts.push_back(b - onset);
  }
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const std::size_t a = starts[k], b = k + 1 < starts.size() ? starts[k + 1] : phones.size();
    Syllable syl;
    syl.phones.assign(phones.begin() + static_cast<std::ptrdiff_t>(a), phones.begin() + static_cast<std::ptrdiff_t>(b));
    syl.nucleus = nuclei[k] - a;
    syl.stress = k == 0 ? 1 : 0;
    out.push_back(std::move(syl));
  }
  return out;
}

}  // namespace nts
