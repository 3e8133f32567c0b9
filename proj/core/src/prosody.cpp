#include "nts/prosody.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nts/error.hpp"
#include "text_util.hpp"

namespace nts {

PhoneStat DurationStats::get(std::string_view phone) const {
  auto it = phones_.find(phone);
  if (it == phones_.end()) return global_;
  return it->second;
}

DurationStats phone_stats(std::span<const std::pair<std::string, double>> tokens) {
  if (tokens.empty()) throw InvalidInput("phone_stats: empty corpus");
  struct Acc {
    double sum = 0, sq = 0;
    std::size_t n = 0;
  };
  std::map<std::string, Acc, std::less<>> acc;
  Acc all;
  for (const auto& [p, d] : tokens) {
    if (!std::isfinite(d)) throw InvalidInput("phone_stats: non-finite duration");
    auto& a = acc[p];
    a.sum += d;
    a.n += 1;
    all.sum += d;
    all.n += 1;
  }
  // Second pass around the mean keeps the variance accurate.
  for (const auto& [p, d] : tokens) {
    auto& a = acc[p];
    const double m = a.sum / static_cast<double>(a.n);
    a.sq += (d - m) * (d - m);
    const double gm = all.sum / static_cast<double>(all.n);
    all.sq += (d - gm) * (d - gm);
  }
  auto stat = [](const Acc& a) {
    PhoneStat s;
    s.count = a.n;
    s.mean = a.sum / static_cast<double>(a.n);
    s.std = a.n >= 2 ? std::sqrt(a.sq / static_cast<double>(a.n - 1)) : 0.0;
    return s;
  };
  DurationStats out;
  out.global_ = stat(all);
  if (!(out.global_.std > 0.0)) out.global_.std = 1.0;
  for (const auto& [p, a] : acc) {
    auto s = stat(a);
    if (!(s.std > 0.0)) s.std = out.global_.std;
    out.phones_.emplace(p, s);
  }
  return out;
}

std::string DurationStats::serialize() const {
  std::ostringstream out;
  out.precision(17);
  out << "nts-durstats 1\n";
  out << "global " << global_.mean << ' ' << global_.std << ' ' << global_.count << '\n';
  for (const auto& [p, s] : phones_) out << "phone " << p << ' ' << s.mean << ' ' << s.std << ' ' << s.count << '\n';
  return out.str();
}

DurationStats DurationStats::parse(std::string_view text, const std::string& source) {
  DurationStats out;
  bool header = false, global = false;
  std::size_t lineno = 0;
  for (auto raw : detail::lines(text)) {
    ++lineno;
    const auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto f = detail::split_ws(line);
    if (!header) {
      if (f.size() != 2 || f[0] != "nts-durstats" || f[1] != "1")
        throw ParseError(source, lineno, "expected header 'nts-durstats 1'");
      header = true;
      continue;
    }
    auto num = [&](std::string_view s) {
      std::string str(s);
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(str, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != str.size() || !std::isfinite(v)) throw ParseError(source, lineno, "bad number '" + str + "'");
      return v;
    };
    PhoneStat s;
    if (f[0] == "global" && f.size() == 4) {
      s.mean = num(f[1]);
      s.std = num(f[2]);
      s.count = static_cast<std::size_t>(num(f[3]));
      out.global_ = s;
      global = true;
    } else if (f[0] == "phone" && f.size() == 5) {
      s.mean = num(f[2]);
      s.std = num(f[3]);
      s.count = static_cast<std::size_t>(num(f[4]));
      out.phones_[std::string(f[1])] = s;
    } else {
      throw ParseError(source, lineno, "expected 'global' or 'phone' record");
    }
    if (!(s.std > 0.0)) throw ParseError(source, lineno, "standard deviation must be positive");
  }
  if (!header || !global) throw ParseError(source, lineno, "missing header or global record");
  return out;
}

void DurationStats::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << serialize();
}

DurationStats DurationStats::load(const std::filesystem::path& path) {
  try {
    return parse(detail::read_file(path), path.string());
  } catch (const ParseError& e) {
    throw ModelError(e.what());
  }
}

double to_log(double ms) {
  if (!(ms > 0.0)) throw InvalidInput("to_log: duration must be positive");
  return std::log(ms);
}

double from_log(double value) { return std::exp(value); }

double to_zscore(double ms, std::string_view phone, const DurationStats& stats) {
  const auto s = stats.get(phone);
  return (ms - s.mean) / s.std;
}

double from_zscore(double z, std::string_view phone, const DurationStats& stats) {
  const auto s = stats.get(phone);
  return std::max(kMinDurationMs, s.mean + z * s.std);
}

DurationMode parse_duration_mode(std::string_view s) {
  if (s == "log") return DurationMode::Log;
  if (s == "zscore") return DurationMode::ZScore;
  throw InvalidInput("duration mode must be 'log' or 'zscore', got '" + std::string(s) + "'");
}

std::string_view to_string(DurationMode m) { return m == DurationMode::Log ? "log" : "zscore"; }

namespace {

const Word& word_of(const LinguisticRep& rep, const PhoneRef& r) { return rep.words.at(r.word); }
const Syllable& syllable_of(const LinguisticRep& rep, const PhoneRef& r) {
  return rep.words.at(r.word).syllables.at(r.syllable);
}

// Syllables of the rep in order, with their word index.
struct SylInfo {
  std::size_t word;
  bool accent;
};

double clip10(std::size_t n) { return static_cast<double>(std::min<std::size_t>(n, 10)) / 10.0; }

}  // namespace

RuleConditions rule_conditions(const LinguisticRep& rep, const PhoneRef& ref) {
  const auto& w = word_of(rep, ref);
  const auto& s = syllable_of(rep, ref);
  const bool last_syllable = ref.syllable + 1 == w.syllables.size();
  RuleConditions c{};
  c[kPhraseFinalSyllable] = last_syllable && (w.boundary_after & kPhraseBoundary);
  c[kClauseFinalSyllable] = last_syllable && (w.boundary_after & kClauseBoundary);
  c[kUnstressedSyllable] = s.stress == 0;
  c[kFunctionWord] = !w.content;
  c[kSyllableNucleus] = ref.phone == s.nucleus;
  c[kPrePausal] = (w.boundary_after & (kClauseBoundary | kSentenceBoundary)) != 0;
  c[kPolysyllabicWord] = w.syllables.size() > 1;
  c[kAccentedSyllable] = s.pitch_accent;
  return c;
}

std::size_t duration_slot_size(const FeatureSystem& fs) { return phone_encoding_size(fs) + 2 + 2 * kBoundaryLevels; }

std::size_t duration_input_size(const FeatureSystem& fs) {
  return (2 * kDurationWindowRadius + 1) * duration_slot_size(fs) + 1 + 4 + 2 + kRuleBitCount;
}

std::vector<std::vector<double>> encode_duration_inputs(const LinguisticRep& rep, const FeatureSystem& fs) {
  const auto refs = flatten(rep);
  const auto dist = boundary_distances(rep);
  std::vector<std::vector<double>> slots;
  slots.reserve(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto& r = refs[i];
    auto v = phone_encoding(phone_at(rep, r), fs);
    const int stress = syllable_of(rep, r).stress;
    v.push_back(stress == 1 ? 1.0 : stress == 2 ? 0.5 : 0.0);
    v.push_back(word_of(rep, r).content ? 1.0 : 0.0);
    for (std::size_t l = 0; l < kBoundaryLevels; ++l) v.push_back(dist[i].previous[l] == 0 ? 1.0 : 0.0);
    for (std::size_t l = 0; l < kBoundaryLevels; ++l) v.push_back(dist[i].next[l] == 0 ? 1.0 : 0.0);
    slots.push_back(std::move(v));
  }

  // Syllable-level positions.
  std::vector<SylInfo> syls;
  std::vector<std::size_t> first_syl(rep.words.size());
  for (std::size_t w = 0; w < rep.words.size(); ++w) {
    first_syl[w] = syls.size();
    for (const auto& s : rep.words[w].syllables) syls.push_back({w, s.pitch_accent});
  }
  const std::size_t ns = syls.size();
  // since[l][k]: syllables between the boundary opening k's span and k;
  // until[l][k]: syllables after k up to the span's end.
  std::array<std::vector<std::size_t>, 2> since, until;
  const std::array<std::uint8_t, 2> flags{kPhraseBoundary, kClauseBoundary};
  for (std::size_t l = 0; l < 2; ++l) {
    since[l].assign(ns, 0);
    until[l].assign(ns, 0);
    std::size_t start = 0;
    for (std::size_t k = 0; k < ns; ++k) {
      since[l][k] = k - start;
      const auto w = syls[k].word;
      const bool word_end = k + 1 == ns || syls[k + 1].word != w;
      if (word_end && ((rep.words[w].boundary_after & flags[l]) || k + 1 == ns)) start = k + 1;
    }
    std::size_t end = ns;
    for (std::size_t k = ns; k-- > 0;) {
      const auto w = syls[k].word;
      const bool word_end = k + 1 == ns || syls[k + 1].word != w;
      if (word_end && (rep.words[w].boundary_after & flags[l])) end = k + 1;
      until[l][k] = end - 1 - k;
    }
  }
  std::vector<std::size_t> prev_acc(ns, 10), next_acc(ns, 10);
  for (std::size_t k = 0, last = static_cast<std::size_t>(-1); k < ns; ++k) {
    if (syls[k].accent) last = k;
    if (last != static_cast<std::size_t>(-1)) prev_acc[k] = k - last;
  }
  for (std::size_t k = ns, next = static_cast<std::size_t>(-1); k-- > 0;) {
    if (syls[k].accent) next = k;
    if (next != static_cast<std::size_t>(-1)) next_acc[k] = next - k;
  }

  const std::vector<double> pad(duration_slot_size(fs), 0.0);
  std::vector<std::vector<double>> out;
  out.reserve(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto& r = refs[i];
    auto v = assemble_window(slots, static_cast<std::ptrdiff_t>(i), kDurationWindowRadius, pad);
    const auto& syl = syllable_of(rep, r);
    const double offset = syl.nucleus == kNoNucleus
                              ? 0.0
                              : static_cast<double>(static_cast<std::ptrdiff_t>(r.phone) -
                                                    static_cast<std::ptrdiff_t>(syl.nucleus));
    v.push_back(std::clamp(offset, -4.0, 4.0) / 4.0);
    const std::size_t k = first_syl[r.word] + r.syllable;
    for (std::size_t l = 0; l < 2; ++l) {
      v.push_back(clip10(since[l][k]));
      v.push_back(clip10(until[l][k]));
    }
    v.push_back(clip10(prev_acc[k]));
    v.push_back(clip10(next_acc[k]));
    for (bool b : rule_conditions(rep, r)) v.push_back(b ? 1.0 : 0.0);
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<double> encode_duration_input(const LinguisticRep& rep, std::size_t phone_index, const FeatureSystem& fs) {
  if (phone_index >= rep.phone_count())
    throw InvalidInput("encode_duration_input: phone index " + std::to_string(phone_index) + " out of range");
  return encode_duration_inputs(rep, fs)[phone_index];
}

double duration_target(double ms, std::string_view phone, const DurationStats& stats, DurationMode mode) {
  return mode == DurationMode::Log ? to_log(ms) : to_zscore(ms, phone, stats);
}

double duration_from_output(double y, std::string_view phone, const DurationStats& stats, DurationMode mode) {
  if (mode == DurationMode::Log) return std::max(kMinDurationMs, from_log(std::min(y, 10.0)));
  return from_zscore(y, phone, stats);
}

std::vector<std::pair<std::string, double>> duration_tokens(std::span<const DurationExample> examples) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& ex : examples) {
    const auto refs = flatten(ex.rep);
    if (refs.size() != ex.durations.size()) throw InvalidInput("duration example: one duration per phone required");
    for (std::size_t i = 0; i < refs.size(); ++i) out.emplace_back(phone_at(ex.rep, refs[i]), ex.durations[i]);
  }
  return out;
}

std::vector<Sample> build_duration_dataset(std::span<const DurationExample> examples, const FeatureSystem& fs,
                                           const DurationStats& stats, DurationMode mode) {
  std::vector<Sample> out;
  for (const auto& ex : examples) {
    const auto refs = flatten(ex.rep);
    if (refs.size() != ex.durations.size()) throw InvalidInput("duration example: one duration per phone required");
    auto inputs = encode_duration_inputs(ex.rep, fs);
    for (std::size_t i = 0; i < refs.size(); ++i)
      out.push_back({std::move(inputs[i]), {duration_target(ex.durations[i], phone_at(ex.rep, refs[i]), stats, mode)}});
  }
  return out;
}

Network make_duration_network(const FeatureSystem& fs, std::size_t hidden, const TrainConfig& cfg) {
  return make_network({duration_input_size(fs), hidden, 1}, Activation::Tanh, Activation::Linear, cfg);
}

std::vector<double> predict_durations(const LinguisticRep& rep, const Network& net, const DurationStats& stats,
                                      DurationMode mode, const FeatureSystem& fs) {
  if (net.input_size() != duration_input_size(fs) || net.output_size() != 1)
    throw ModelError("duration net does not match the phone inventory");
  const auto refs = flatten(rep);
  const auto inputs = encode_duration_inputs(rep, fs);
  std::vector<double> out;
  out.reserve(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i)
    out.push_back(duration_from_output(forward(net, inputs[i])[0], phone_at(rep, refs[i]), stats, mode));
  return out;
}

double duration_mae(std::span<const DurationExample> examples, const Network& net, const DurationStats& stats,
                    DurationMode mode, const FeatureSystem& fs) {
  double err = 0.0;
  std::size_t n = 0;
  for (const auto& ex : examples) {
    const auto pred = predict_durations(ex.rep, net, stats, mode, fs);
    for (std::size_t i = 0; i < pred.size(); ++i, ++n) err += std::abs(pred[i] - ex.durations.at(i));
  }
  return n ? err / static_cast<double>(n) : 0.0;
}

double phone_mean_mae(std::span<const DurationExample> examples, const DurationStats& stats) {
  double err = 0.0;
  std::size_t n = 0;
  for (const auto& [p, d] : duration_tokens(examples)) {
    err += std::abs(stats.get(p).mean - d);
    ++n;
  }
  return n ? err / static_cast<double>(n) : 0.0;
}

}  // namespace nts
