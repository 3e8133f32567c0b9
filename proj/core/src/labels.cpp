#include "nts/labels.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "nts/error.hpp"
#include "text_util.hpp"

namespace nts {

using detail::split;
using detail::split_ws;
using detail::trim;

namespace {

std::uint8_t marks_for_punctuation(std::string_view p) {
  if (p == ",") return boundary_marks(BoundaryLevel::Phrase);
  if (p == ";" || p == ":") return boundary_marks(BoundaryLevel::Clause);
  if (p == "." || p == "!" || p == "?") return boundary_marks(BoundaryLevel::Sentence);
  return kWordBoundary;
}

int break_index_for(std::uint8_t marks) {
  if (marks & (kClauseBoundary | kSentenceBoundary)) return 4;
  if (marks & kPhraseBoundary) return 3;
  return 1;
}

char boundary_code(std::uint8_t marks) {
  if (marks & kSentenceBoundary) return 's';
  if (marks & kClauseBoundary) return 'c';
  if (marks & kPhraseBoundary) return 'p';
  return 'w';
}

}  // namespace

LinguisticRep build_rep(const Sentence& tokens, const std::vector<std::string>& tags,
                        const std::vector<std::vector<Syllable>>& prons) {
  if (tags.size() != tokens.size()) throw InvalidInput("build_rep: one tag per token required");
  LinguisticRep rep;
  std::size_t next_pron = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (is_punctuation(tokens[i])) {
      if (!rep.words.empty()) rep.words.back().boundary_after |= marks_for_punctuation(tokens[i]);
      continue;
    }
    if (next_pron >= prons.size()) throw InvalidInput("build_rep: missing pronunciation for '" + tokens[i] + "'");
    Word w;
    w.orthography = tokens[i];
    w.pos = tags[i];
    w.syllables = prons[next_pron++];
    annotate_word(w);
    rep.words.push_back(std::move(w));
  }
  if (next_pron != prons.size()) throw InvalidInput("build_rep: more pronunciations than words");
  if (!rep.words.empty()) rep.words.back().boundary_after |= boundary_marks(BoundaryLevel::Sentence);
  for (auto& w : rep.words) w.break_index = break_index_for(w.boundary_after);
  return rep;
}

LinguisticRep apply_surface(const LinguisticRep& rep, const std::vector<std::vector<std::string>>& surface) {
  if (surface.size() != rep.words.size()) throw InvalidInput("apply_surface: one phone list per word required");
  LinguisticRep out = rep;
  for (std::size_t w = 0; w < rep.words.size(); ++w) {
    if (surface[w].size() != rep.words[w].phone_count())
      throw InvalidInput("apply_surface: word '" + rep.words[w].orthography + "' has " +
                         std::to_string(rep.words[w].phone_count()) + " phones, got " +
                         std::to_string(surface[w].size()));
    std::size_t k = 0;
    for (std::size_t s = 0; s < rep.words[w].syllables.size(); ++s) {
      const auto& lex = rep.words[w].syllables[s];
      auto& syl = out.words[w].syllables[s];
      syl.phones.clear();
      syl.nucleus = kNoNucleus;
      for (std::size_t p = 0; p < lex.phones.size(); ++p, ++k) {
        const bool nucleus = p == lex.nucleus;
        const auto& sym = surface[w][k];
        if (sym == kDeletionSymbol) {
          if (!nucleus) continue;
          syl.nucleus = syl.phones.size();
          syl.phones.push_back(lex.phones[p]);
          continue;
        }
        if (nucleus) syl.nucleus = syl.phones.size();
        syl.phones.push_back(sym);
      }
    }
  }
  return out;
}

LinguisticRep LabeledUtterance::rep() const {
  LinguisticRep r;
  for (const auto& lw : words) {
    Word w;
    w.orthography = lw.orthography;
    w.pos = lw.pos;
    w.syllables = lw.pronunciation;
    w.boundary_after = lw.boundary_after;
    w.break_index = break_index_for(lw.boundary_after);
    annotate_word(w);
    r.words.push_back(std::move(w));
  }
  return r;
}

bool LabeledUtterance::has_surface() const {
  for (const auto& w : words)
    if (!w.surface) return false;
  return !words.empty();
}

bool LabeledUtterance::has_durations() const {
  for (const auto& w : words)
    if (!w.durations) return false;
  return !words.empty();
}

std::vector<std::vector<std::string>> LabeledUtterance::surface() const {
  std::vector<std::vector<std::string>> out;
  for (const auto& w : words) {
    if (!w.surface) throw DataError("utterance has no surface pronunciation for '" + w.orthography + "'");
    out.push_back(*w.surface);
  }
  return out;
}

std::vector<double> LabeledUtterance::durations() const {
  std::vector<double> out;
  for (const auto& w : words) {
    if (!w.durations) throw DataError("utterance has no durations for '" + w.orthography + "'");
    out.insert(out.end(), w.durations->begin(), w.durations->end());
  }
  return out;
}

std::vector<LabeledUtterance> parse_labels(std::string_view text, const FeatureSystem& fs, const std::string& source) {
  std::vector<LabeledUtterance> out;
  LabeledUtterance cur;
  bool open = false;
  auto flush = [&] {
    if (open && !cur.words.empty()) {
      cur.words.back().boundary_after |= boundary_marks(BoundaryLevel::Sentence);
      out.push_back(std::move(cur));
    }
    cur = {};
    open = false;
  };
  std::size_t lineno = 0;
  for (auto raw : detail::lines(text)) {
    ++lineno;
    const auto line = trim(raw);
    if (line.empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') continue;
    if (line.front() == '@') {
      if (!cur.words.empty()) throw ParseError(source, lineno, "audio line must precede the utterance's words");
      cur.audio = std::string(trim(line.substr(1)));
      if (cur.audio.empty()) throw ParseError(source, lineno, "empty audio file name");
      open = true;
      continue;
    }
    const auto f = split(raw, '\t');
    if (f.size() != 6) throw ParseError(source, lineno, "expected 6 tab-separated fields, got " + std::to_string(f.size()));
    LabeledWord w;
    w.orthography = std::string(trim(f[0]));
    w.pos = std::string(trim(f[1]));
    if (w.orthography.empty() || w.pos.empty()) throw ParseError(source, lineno, "empty orthography or tag");
    try {
      w.pronunciation = parse_pronunciation(trim(f[2]), &fs);
    } catch (const Error& e) {
      throw ParseError(source, lineno, e.what());
    }
    std::size_t n = 0;
    for (const auto& s : w.pronunciation) n += s.phones.size();
    const auto b = trim(f[3]);
    if (b == "w") w.boundary_after = boundary_marks(BoundaryLevel::Word);
    else if (b == "p") w.boundary_after = boundary_marks(BoundaryLevel::Phrase);
    else if (b == "c") w.boundary_after = boundary_marks(BoundaryLevel::Clause);
    else if (b == "s") w.boundary_after = boundary_marks(BoundaryLevel::Sentence);
    else throw ParseError(source, lineno, "boundary must be w, p, c or s");
    const auto sf = trim(f[4]);
    if (sf != "*") {
      std::vector<std::string> syms;
      for (auto s : split(sf, '-')) {
        const std::string sym(trim(s));
        if (!fs.find(sym)) throw ParseError(source, lineno, "unknown surface phone '" + sym + "'");
        syms.push_back(sym);
      }
      if (syms.size() != n)
        throw ParseError(source, lineno, "surface has " + std::to_string(syms.size()) + " symbols for " +
                                             std::to_string(n) + " lexical phones");
      w.surface = std::move(syms);
    }
    const auto df = trim(f[5]);
    if (df != "*") {
      std::vector<double> d;
      for (auto s : split_ws(df)) {
        std::string str(s);
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(str, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != str.size() || !std::isfinite(v) || v <= 0.0)
          throw ParseError(source, lineno, "bad duration '" + str + "'");
        d.push_back(v);
      }
      if (d.size() != n)
        throw ParseError(source, lineno, std::to_string(d.size()) + " durations for " + std::to_string(n) + " phones");
      w.durations = std::move(d);
    }
    cur.words.push_back(std::move(w));
    open = true;
  }
  flush();
  return out;
}

std::vector<LabeledUtterance> load_labels(const std::filesystem::path& path, const FeatureSystem& fs) {
  return parse_labels(detail::read_file(path), fs, path.string());
}

std::string format_labels(const std::vector<LabeledUtterance>& utterances) {
  std::ostringstream out;
  out << "# orthography\tPOS\tpronunciation\tboundary\tsurface\tdurations_ms\n";
  out.precision(6);
  for (std::size_t u = 0; u < utterances.size(); ++u) {
    if (u > 0) out << '\n';
    const auto& utt = utterances[u];
    if (!utt.audio.empty()) out << "@ " << utt.audio << '\n';
    for (const auto& w : utt.words) {
      out << w.orthography << '\t' << w.pos << '\t' << format_pronunciation(w.pronunciation) << '\t'
          << boundary_code(w.boundary_after) << '\t';
      if (w.surface) {
        for (std::size_t i = 0; i < w.surface->size(); ++i) out << (i ? "-" : "") << (*w.surface)[i];
      } else {
        out << '*';
      }
      out << '\t';
      if (w.durations) {
        for (std::size_t i = 0; i < w.durations->size(); ++i) out << (i ? " " : "") << (*w.durations)[i];
      } else {
        out << '*';
      }
      out << '\n';
    }
  }
  return out.str();
}

void save_labels(const std::filesystem::path& path, const std::vector<LabeledUtterance>& utterances) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << format_labels(utterances);
  if (!out) throw DataError("write failed: " + path.string());
}

LabeledUtterance to_labeled(const LinguisticRep& rep) {
  LabeledUtterance u;
  for (const auto& w : rep.words) {
    LabeledWord lw;
    lw.orthography = w.orthography;
    lw.pos = w.pos;
    lw.pronunciation = w.syllables;
    lw.boundary_after = w.boundary_after;
    u.words.push_back(std::move(lw));
  }
  return u;
}

}  // namespace nts
