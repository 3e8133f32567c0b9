#include "nts/lingnets.hpp"

#include <algorithm>
#include <cmath>

#include "nts/error.hpp"
#include "nts/labels.hpp"

namespace nts {

namespace {

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

Symbols letter_symbols(std::string_view letters) {
  Symbols out;
  for (char c : letters) out.emplace_back(1, c);
  return out;
}

double stress_value(int stress) { return stress == 1 ? 1.0 : stress == 2 ? 0.5 : 0.0; }

double scaled_distance(int d) { return std::min(d, 10) / 10.0; }

}  // namespace

// ---------------------------------------------------------------------------

G2PAlphabet::G2PAlphabet(const FeatureSystem& fs) {
  auto add = [&](std::string name, std::vector<std::string> expansion) {
    index_.emplace(name, names_.size());
    names_.push_back(std::move(name));
    expansions_.push_back(std::move(expansion));
  };
  for (const auto& p : fs.phones())
    if (p.lexical) add(p.symbol, {p.symbol});
  deletion_ = names_.size();
  add(std::string(kDeletionSymbol), {});
  for (const auto& c : fs.composites()) {
    const auto& a = fs.phone(c.phones[0]);
    const auto& b = fs.phone(c.phones[1]);
    if (!a.lexical || !b.lexical) throw DataError("composite '" + c.name + "' expands to a non-lexical phone");
    if (index_.count(c.name)) throw DataError("composite '" + c.name + "' clashes with a phone symbol");
    add(c.name, {a.symbol, b.symbol});
  }
}

std::optional<std::size_t> G2PAlphabet::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> G2PAlphabet::composite(std::string_view first, std::string_view second) const {
  for (std::size_t c = deletion_ + 1; c < names_.size(); ++c)
    if (expansions_[c][0] == first && expansions_[c][1] == second) return c;
  return std::nullopt;
}

std::size_t letter_encoding_size(const FeatureSystem& fs) { return 26 + fs.feature_count(); }

std::vector<double> letter_encoding(char letter, const FeatureSystem& fs) {
  const auto f = letter_features(letter, fs);
  std::vector<double> v(letter_encoding_size(fs), 0.0);
  v[static_cast<std::size_t>(letter - 'a')] = 1.0;
  for (std::size_t k = 0; k < fs.feature_count(); ++k)
    if (f[k]) v[26 + k] = 1.0;
  return v;
}

std::size_t g2p_input_size(const FeatureSystem& fs) { return (2 * kLingWindowRadius + 1) * letter_encoding_size(fs); }

std::string g2p_letters(std::string_view word) {
  std::string out;
  for (char c : word) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c >= 'a' && c <= 'z') out.push_back(c);
  }
  return out;
}

std::vector<std::vector<double>> g2p_inputs(std::string_view word, const FeatureSystem& fs) {
  const auto letters = g2p_letters(word);
  std::vector<std::vector<double>> enc;
  for (char c : letters) enc.push_back(letter_encoding(c, fs));
  const std::vector<double> pad(letter_encoding_size(fs), 0.0);
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < enc.size(); ++i)
    out.push_back(assemble_window(enc, static_cast<std::ptrdiff_t>(i), kLingWindowRadius, pad));
  return out;
}

std::optional<std::vector<std::size_t>> align_letters(std::string_view letters, const std::vector<std::string>& phones,
                                                      const G2PAlphabet& alphabet, const CostModel& cm) {
  const auto al = align(letter_symbols(letters), phones, cm);
  const double limit = 1.5 * static_cast<double>(std::max(letters.size(), phones.size()));
  if (al.total_cost > limit) return std::nullopt;

  // Per letter the phones it produces; an inserted phone joins a neighbour.
  std::vector<std::vector<std::string>> produced;
  std::vector<std::string> pending;  // insertions before the first letter
  for (const auto& p : al.pairs) {
    if (p.a) {
      produced.emplace_back();
      if (!pending.empty()) {
        produced.back() = pending;
        pending.clear();
      }
      if (p.b) produced.back().push_back(*p.b);
    } else if (produced.empty()) {
      pending.push_back(*p.b);
    } else {
      produced.back().push_back(*p.b);
    }
  }
  if (!pending.empty()) return std::nullopt;  // no letters at all

  // A letter holding three phones, or two without a composite, may hand one
  // phone to an empty neighbour, or to a one-phone neighbour it forms a
  // composite with.
  for (std::size_t i = 0; i < produced.size(); ++i) {
    auto& cur = produced[i];
    const bool ok = cur.size() <= 1 || (cur.size() == 2 && alphabet.composite(cur[0], cur[1]));
    if (ok) continue;
    if (i + 1 < produced.size() && produced[i + 1].empty()) {
      produced[i + 1].push_back(cur.back());
      cur.pop_back();
    } else if (i > 0 && produced[i - 1].empty()) {
      produced[i - 1].push_back(cur.front());
      cur.erase(cur.begin());
    } else if (i + 1 < produced.size() && produced[i + 1].size() == 1 &&
               alphabet.composite(cur.back(), produced[i + 1][0])) {
      produced[i + 1].insert(produced[i + 1].begin(), cur.back());
      cur.pop_back();
    } else if (i > 0 && produced[i - 1].size() == 1 && alphabet.composite(produced[i - 1][0], cur.front())) {
      produced[i - 1].push_back(cur.front());
      cur.erase(cur.begin());
    }
  }

  std::vector<std::size_t> classes;
  for (const auto& ph : produced) {
    if (ph.empty()) {
      classes.push_back(alphabet.deletion());
    } else if (ph.size() == 1) {
      const auto c = alphabet.find(ph[0]);
      if (!c) return std::nullopt;
      classes.push_back(*c);
    } else if (ph.size() == 2) {
      const auto c = alphabet.composite(ph[0], ph[1]);
      if (!c) return std::nullopt;
      classes.push_back(*c);
    } else {
      return std::nullopt;
    }
  }
  return classes;
}

G2PDataset build_g2p_dataset(const Lexicon& lex, const FeatureSystem& fs, const CostModel& cm, std::size_t limit) {
  const G2PAlphabet alphabet(fs);
  G2PDataset ds;
  std::size_t used = 0;
  for (const auto& [orth, entry] : lex.entries()) {
    if (used >= limit) break;
    ++used;
    const auto letters = g2p_letters(orth);
    if (letters.empty()) continue;
    const auto inputs = g2p_inputs(orth, fs);
    for (const auto& v : entry.variants) {
      std::vector<std::string> phones;
      for (const auto& s : v.pronunciation) phones.insert(phones.end(), s.phones.begin(), s.phones.end());
      const auto classes = align_letters(letters, phones, alphabet, cm);
      if (!classes) {
        ds.skipped.push_back(orth + " " + format_pronunciation(v.pronunciation));
        continue;
      }
      for (std::size_t i = 0; i < letters.size(); ++i) {
        Sample s;
        s.input = inputs[i];
        s.target.assign(alphabet.size(), 0.0);
        s.target[(*classes)[i]] = 1.0;
        ds.samples.push_back(std::move(s));
      }
      ds.words.push_back(orth);
    }
  }
  return ds;
}

Network make_g2p_network(const FeatureSystem& fs, std::size_t hidden, const TrainConfig& cfg) {
  return make_network({g2p_input_size(fs), hidden, G2PAlphabet(fs).size()}, Activation::Tanh, Activation::Softmax, cfg);
}

std::vector<std::size_t> g2p_classes(std::string_view word, const Network& net, const FeatureSystem& fs) {
  const G2PAlphabet alphabet(fs);
  if (net.input_size() != g2p_input_size(fs) || net.output_size() != alphabet.size())
    throw ModelError("letter-to-sound net does not match the phone inventory");
  std::vector<std::size_t> out;
  for (const auto& in : g2p_inputs(word, fs)) out.push_back(argmax(forward(net, in)));
  return out;
}

std::vector<std::string> g2p_predict(std::string_view word, const Network& net, const FeatureSystem& fs) {
  const G2PAlphabet alphabet(fs);
  const auto classes = g2p_classes(word, net, fs);
  std::vector<std::string> phones;
  for (auto c : classes) {
    const auto& e = alphabet.expansion(c);
    phones.insert(phones.end(), e.begin(), e.end());
  }
  if (!classes.empty() && phones.empty())
    throw ModelError("letter-to-sound net produced an empty pronunciation for '" + std::string(word) + "'");
  return phones;
}

std::vector<Syllable> g2p_pronounce(std::string_view word, const Network& net, const FeatureSystem& fs) {
  const auto phones = g2p_predict(word, net, fs);
  if (phones.empty()) throw ModelError("no letters to pronounce in '" + std::string(word) + "'");
  return syllabify(phones, fs);
}

double classification_accuracy(const Network& net, std::span<const Sample> samples) {
  if (samples.empty()) return 0.0;
  std::size_t right = 0;
  for (const auto& s : samples) right += argmax(forward(net, s.input)) == argmax(s.target);
  return static_cast<double>(right) / static_cast<double>(samples.size());
}

// ---------------------------------------------------------------------------

PostlexAlphabet::PostlexAlphabet(const FeatureSystem& fs) {
  for (const auto& p : fs.phones()) {
    if (!p.postlexical) continue;
    index_.emplace(p.symbol, symbols_.size());
    symbols_.push_back(p.symbol);
  }
  const auto d = find(kDeletionSymbol);
  if (!d) throw DataError("postlexical alphabet lacks the deletion symbol");
  deletion_ = *d;
  for (auto s : {"dx", "q"})
    if (!find(s)) throw DataError(std::string("postlexical alphabet lacks [") + s + "]");
}

std::optional<std::size_t> PostlexAlphabet::find(std::string_view symbol) const {
  auto it = index_.find(std::string(symbol));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t postlex_slot_size(const FeatureSystem& fs) { return phone_encoding_size(fs) + 1; }

std::size_t postlex_input_size(const FeatureSystem& fs) {
  return (2 * kLingWindowRadius + 1) * postlex_slot_size(fs) + 2 * kBoundaryLevels;
}

std::vector<std::vector<double>> postlex_inputs(const LinguisticRep& rep, const FeatureSystem& fs) {
  const auto refs = flatten(rep);
  const auto dist = boundary_distances(rep);
  std::vector<std::vector<double>> slots;
  for (const auto& r : refs) {
    auto v = phone_encoding(phone_at(rep, r), fs);
    v.push_back(stress_value(rep.words[r.word].syllables[r.syllable].stress));
    slots.push_back(std::move(v));
  }
  const std::vector<double> pad(postlex_slot_size(fs), 0.0);
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    auto v = assemble_window(slots, static_cast<std::ptrdiff_t>(i), kLingWindowRadius, pad);
    for (std::size_t l = 0; l < kBoundaryLevels; ++l) v.push_back(scaled_distance(dist[i].previous[l]));
    for (std::size_t l = 0; l < kBoundaryLevels; ++l) v.push_back(scaled_distance(dist[i].next[l]));
    out.push_back(std::move(v));
  }
  return out;
}

std::optional<std::vector<std::string>> align_surface(const std::vector<std::string>& lexical,
                                                      const std::vector<std::string>& surface,
                                                      const FeatureSystem& fs) {
  if (surface.size() == lexical.size() && std::find(surface.begin(), surface.end(), kDeletionSymbol) != surface.end())
    return surface;  // already one symbol per lexical phone
  const auto al = align(lexical, surface, phone_phone_cost(fs));
  const double limit = 1.5 * static_cast<double>(std::max(lexical.size(), surface.size()));
  if (al.total_cost > limit) return std::nullopt;
  std::vector<std::string> out;
  for (const auto& p : al.pairs) {
    if (!p.a) return std::nullopt;  // insertions have no lexical slot
    out.push_back(p.b ? *p.b : std::string(kDeletionSymbol));
  }
  return out;
}

PostlexDataset build_postlex_dataset(std::span<const PostlexExample> examples, const FeatureSystem& fs) {
  const PostlexAlphabet alphabet(fs);
  PostlexDataset ds;
  for (const auto& ex : examples) {
    if (ex.surface.size() != ex.rep.words.size()) throw InvalidInput("postlex example: one surface list per word");
    std::vector<std::string> targets;
    bool ok = true;
    for (std::size_t w = 0; w < ex.rep.words.size() && ok; ++w) {
      const auto t = align_surface(ex.rep.words[w].phones(), ex.surface[w], fs);
      if (!t) {
        ok = false;
        break;
      }
      for (const auto& s : *t) {
        if (!alphabet.find(s)) {
          ok = false;
          break;
        }
        targets.push_back(s);
      }
    }
    if (!ok) {
      ++ds.skipped;
      continue;
    }
    const auto inputs = postlex_inputs(ex.rep, fs);
    const auto refs = flatten(ex.rep);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      Sample s;
      s.input = inputs[i];
      s.target.assign(alphabet.size(), 0.0);
      s.target[*alphabet.find(targets[i])] = 1.0;
      ds.samples.push_back(std::move(s));
      ds.lexical.push_back(phone_at(ex.rep, refs[i]));
      ds.reference.push_back(targets[i]);
    }
  }
  return ds;
}

Network make_postlex_network(const FeatureSystem& fs, std::size_t hidden, const TrainConfig& cfg) {
  return make_network({postlex_input_size(fs), hidden, PostlexAlphabet(fs).size()}, Activation::Tanh,
                      Activation::Softmax, cfg);
}

Network identity_postlex_network(const FeatureSystem& fs) {
  const PostlexAlphabet alphabet(fs);
  Network net({postlex_input_size(fs), alphabet.size()}, Activation::Tanh, Activation::Softmax);
  auto& layer = net.layers()[0];
  const std::size_t centre = kLingWindowRadius * postlex_slot_size(fs);
  for (std::size_t id = 0; id < fs.size(); ++id)
    if (auto c = alphabet.find(fs.phone(id).symbol)) layer.w(centre + id, *c) = 10.0;
  return net;
}

std::vector<std::vector<std::string>> postlex_classes(const LinguisticRep& rep, const Network& net,
                                                      const FeatureSystem& fs) {
  const PostlexAlphabet alphabet(fs);
  if (net.input_size() != postlex_input_size(fs) || net.output_size() != alphabet.size())
    throw ModelError("postlexical net does not match the phone inventory");
  const auto inputs = postlex_inputs(rep, fs);
  const auto refs = flatten(rep);
  std::vector<std::vector<std::string>> out(rep.words.size());
  for (std::size_t i = 0; i < inputs.size(); ++i)
    out[refs[i].word].push_back(alphabet.symbol(argmax(forward(net, inputs[i]))));
  return out;
}

std::vector<std::vector<std::string>> postlex_predict(const LinguisticRep& rep, const Network& net,
                                                      const FeatureSystem& fs) {
  auto out = postlex_classes(rep, net, fs);
  for (auto& w : out) std::erase(w, std::string(kDeletionSymbol));
  return out;
}

PostlexMetrics postlex_metrics(const std::vector<std::string>& predictions, const std::vector<std::string>& references,
                               const std::vector<std::string>& lexical) {
  if (predictions.size() != references.size() || lexical.size() != references.size())
    throw InvalidInput("postlex_metrics: prediction, reference and lexical lists differ in length");
  PostlexMetrics m;
  m.slots = references.size();
  if (m.slots == 0) return m;
  std::size_t same = 0, right = 0;
  for (std::size_t i = 0; i < m.slots; ++i) {
    same += references[i] == lexical[i];
    right += predictions[i] == references[i];
  }
  m.identity_baseline = 100.0 * static_cast<double>(same) / static_cast<double>(m.slots);
  m.accuracy = 100.0 * static_cast<double>(right) / static_cast<double>(m.slots);
  return m;
}

}  // namespace nts
