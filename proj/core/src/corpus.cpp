#include "nts/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "nts/error.hpp"
#include "nts/wav.hpp"

namespace nts {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_vowel(const std::string& p, const FeatureSystem& fs) { return p != kDeletionSymbol && fs.is_syllabic(fs.id(p)); }

struct Flat {
  std::vector<PhoneRef> refs;
  std::vector<std::string> phones;
  BoundaryDistances dist;
  std::vector<int> stress;
};

Flat flat_view(const LinguisticRep& rep) {
  Flat f;
  f.refs = flatten(rep);
  f.dist = boundary_distances(rep);
  for (const auto& r : f.refs) {
    f.phones.push_back(phone_at(rep, r));
    f.stress.push_back(rep.words[r.word].syllables[r.syllable].stress);
  }
  return f;
}

constexpr std::size_t kWordLevel = 0, kPhraseLevel = 1;

}  // namespace

std::vector<LinguisticRep> sample_reps(const std::vector<TaggedSentence>& corpus, const Lexicon& lex,
                                       std::size_t count, Rng& rng) {
  std::vector<const TaggedSentence*> usable;
  for (const auto& s : corpus) {
    bool ok = !s.empty();
    for (const auto& [tok, tag] : s)
      if (!is_punctuation(tok) && !lex.find(tok)) ok = false;
    if (ok) usable.push_back(&s);
  }
  if (usable.empty()) throw DataError("no tagged sentence is fully covered by the lexicon");
  std::vector<LinguisticRep> out;
  for (std::size_t n = 0; n < count; ++n) {
    const auto& s = *usable[rng.below(usable.size())];
    Sentence tokens;
    std::vector<std::string> tags;
    std::vector<std::vector<Syllable>> prons;
    for (const auto& [tok, tag] : s) {
      tokens.push_back(tok);
      tags.push_back(tag);
      if (!is_punctuation(tok)) prons.push_back(*lookup(tok, tag, lex));
    }
    out.push_back(build_rep(tokens, tags, prons));
  }
  return out;
}

std::vector<std::vector<std::string>> flapping_surface(const LinguisticRep& rep, const FeatureSystem& fs) {
  const auto f = flat_view(rep);
  const std::size_t n = f.phones.size();
  std::vector<std::string> out = f.phones;
  auto vowel = [&](std::size_t i) { return is_vowel(f.phones[i], fs); };
  // Next phone exists and lies in the same phrase.
  auto phrase_next = [&](std::size_t i) { return i + 1 < n && f.dist[i].next[kPhraseLevel] > 0; };
  auto word_final = [&](std::size_t i) { return f.dist[i].next[kWordLevel] == 0; };
  static const std::unordered_map<std::string, std::string> reduce = {
      {"ih", "ax"}, {"eh", "ax"}, {"ae", "ax"}, {"aa", "ax"}, {"ah", "ax"},
      {"ao", "ax"}, {"uh", "ax"}, {"ow", "ax"}, {"er", "ax"}};
  auto nasal = [&](std::size_t i) { return fs.has_feature(fs.id(f.phones[i]), "nasal"); };
  auto voiceless_obstruent = [&](std::size_t i) {
    const auto id = fs.id(f.phones[i]);
    return !fs.is_syllabic(id) && !fs.has_feature(id, "voiced") && !fs.has_feature(id, "sonorant");
  };
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = f.phones[i];
    if (vowel(i)) {
      auto it = reduce.find(p);
      if (f.stress[i] == 0 && it != reduce.end()) out[i] = it->second;
      else if (p == "iy" && f.stress[i] == 0) out[i] = "ih";
      else if ((p == "ey" || p == "ow") && !word_final(i) && !vowel(i + 1)) out[i] = p == "ey" ? "eh" : "ah";
      else if (p == "ao") out[i] = "aa";  // merged low back vowels
      else if (p == "ay" && !(phrase_next(i) && voiceless_obstruent(i + 1))) out[i] = "aa";
      else if ((p == "eh" || p == "ae") && phrase_next(i) && nasal(i + 1)) out[i] = p == "eh" ? "ih" : "eh";
      continue;
    }
    const bool td = p == "t" || p == "d";
    if (td && i > 0 && vowel(i - 1) && f.dist[i].previous[kPhraseLevel] > 0 && phrase_next(i) && vowel(i + 1) &&
        f.stress[i + 1] == 0) {
      out[i] = "dx";
    } else if (td && word_final(i) && i > 0 && !vowel(i - 1) && f.dist[i].previous[kWordLevel] > 0 &&
               phrase_next(i) && !vowel(i + 1)) {
      out[i] = std::string(kDeletionSymbol);
    } else if ((p == "t" || p == "k" || p == "p") && word_final(i) && i > 0 && vowel(i - 1) && phrase_next(i) &&
               !vowel(i + 1)) {
      out[i] = "q";
    } else if (p == "n" && phrase_next(i)) {
      const auto& q = f.phones[i + 1];
      if (q == "p" || q == "b" || q == "m") out[i] = "m";
      else if (q == "k" || q == "g") out[i] = "ng";
    } else if (p == "r" && !(phrase_next(i) && vowel(i + 1))) {
      out[i] = std::string(kDeletionSymbol);  // non-rhotic
    } else if (p == "l" && !(phrase_next(i) && vowel(i + 1))) {
      out[i] = "w";
    } else if (p == "dh" || p == "th") {
      out[i] = p == "dh" ? "d" : "t";
    } else if (p == "ng" && word_final(i) && f.stress[i] == 0) {
      out[i] = "n";
    } else if ((p == "z" || p == "v" || p == "d") && word_final(i) && phrase_next(i) && voiceless_obstruent(i + 1)) {
      out[i] = p == "z" ? "s" : p == "v" ? "f" : "t";
    } else if (p == "s" && i > 0 && vowel(i - 1) && phrase_next(i) && vowel(i + 1)) {
      out[i] = "z";
    } else if (p == "hh" && f.dist[i].previous[kWordLevel] == 0 && f.dist[i].previous[kPhraseLevel] > 0 &&
               f.dist[i].next[kWordLevel] <= 2) {
      out[i] = std::string(kDeletionSymbol);
    }
  }
  std::vector<std::vector<std::string>> words(rep.words.size());
  for (std::size_t i = 0; i < n; ++i) words[f.refs[i].word].push_back(out[i]);
  return words;
}

PhoneTiming phone_timing(std::string_view phone, const FeatureSystem& fs) {
  static const std::unordered_map<std::string, PhoneTiming> table = {
      {"iy", {155, 55}}, {"ih", {135, 40}}, {"ey", {170, 70}}, {"eh", {150, 70}}, {"ae", {200, 80}},
      {"aa", {180, 80}}, {"ao", {190, 80}}, {"ah", {140, 60}}, {"ax", {100, 40}}, {"ow", {170, 70}},
      {"uh", {130, 60}}, {"uw", {160, 70}}, {"er", {180, 80}}, {"ay", {200, 100}}, {"aw", {220, 100}},
      {"oy", {220, 100}}, {"el", {160, 110}}, {"en", {170, 100}}, {"p", {85, 50}},   {"t", {75, 50}},
      {"k", {80, 60}},   {"b", {85, 60}},   {"d", {75, 50}},   {"g", {80, 60}},   {"m", {70, 60}},
      {"n", {60, 50}},   {"ng", {95, 60}},  {"f", {100, 80}},  {"v", {60, 40}},   {"th", {80, 60}},
      {"dh", {50, 30}},  {"s", {105, 60}},  {"z", {75, 40}},   {"sh", {105, 80}}, {"zh", {70, 40}},
      {"hh", {80, 20}},  {"ch", {70, 50}},  {"jh", {70, 50}},  {"l", {80, 40}},   {"r", {80, 30}},
      {"w", {80, 60}},   {"y", {80, 40}},   {"dx", {25, 15}},  {"q", {40, 25}}};
  auto it = table.find(std::string(phone));
  if (it != table.end()) return it->second;
  fs.id(phone);  // unknown symbols are an error
  return fs.is_syllabic(fs.id(phone)) ? PhoneTiming{140, 60} : PhoneTiming{80, 40};
}

std::vector<double> klatt_durations(const LinguisticRep& rep, const FeatureSystem& fs, Rng& rng, double noise_ms) {
  const auto f = flat_view(rep);
  const std::size_t n = f.phones.size();
  std::vector<double> out(n);
  auto has = [&](std::size_t i, std::string_view feat) { return fs.has_feature(fs.id(f.phones[i]), feat); };
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = f.refs[i];
    const auto& w = rep.words[r.word];
    const auto& syl = w.syllables[r.syllable];
    const bool vowel = is_vowel(f.phones[i], fs);
    const bool nucleus = r.phone == syl.nucleus;
    const bool last_syl = r.syllable + 1 == w.syllables.size();
    const bool postvocalic = syl.nucleus != kNoNucleus && r.phone > syl.nucleus;
    double pr = 1.0;
    if (last_syl && (w.boundary_after & kClauseBoundary) && (nucleus || postvocalic)) pr *= 1.4;
    if (nucleus && !(last_syl && (w.boundary_after & kPhraseBoundary))) pr *= 0.6;
    if (nucleus && !last_syl) pr *= 0.85;
    if (nucleus && w.syllables.size() > 1) pr *= 0.8;
    if (!vowel && f.dist[i].previous[kWordLevel] > 0) pr *= 0.85;
    if (syl.stress == 0) pr *= nucleus ? 0.5 : 0.7;
    if (nucleus && syl.pitch_accent) pr *= 1.4;
    if (nucleus && f.dist[i].next[kWordLevel] > 0 && !is_vowel(f.phones[i + 1], fs)) {
      const std::size_t j = i + 1;
      const bool voiced = has(j, "voiced");
      if (has(j, "fricative") && voiced) pr *= 1.3;
      else if (has(j, "stop") && voiced) pr *= 1.15;
      else if (has(j, "nasal")) pr *= 0.9;
      else if (has(j, "stop")) pr *= 0.75;
    }
    if (!vowel) {
      const bool prev_c = f.dist[i].previous[kWordLevel] > 0 && !is_vowel(f.phones[i - 1], fs);
      const bool next_c = f.dist[i].next[kWordLevel] > 0 && !is_vowel(f.phones[i + 1], fs);
      if (prev_c || next_c) pr *= 0.7;
    }
    if (nucleus && !w.content) pr *= 0.8;
    const auto t = phone_timing(f.phones[i], fs);
    double d = t.minimum + (t.inherent - t.minimum) * pr;
    if (noise_ms > 0.0) d += noise_ms * rng.normal();
    d = std::max(20.0, d);
    out[i] = std::round(d * 100.0) / 100.0;
  }
  return out;
}

namespace {

struct Target {
  std::array<double, 3> formants{500, 1500, 2500};
  double voice = 0.0;
  double noise = 0.0;
  double noise_fc = 4000.0;
  double closure = 0.0;  // leading fraction of the phone that is silent (stops)
  double closure_voice = 0.0;
};

Target phone_target(const std::string& p, const FeatureSystem& fs) {
  static const std::unordered_map<std::string, std::array<double, 3>> vowels = {
      {"iy", {270, 2290, 3010}}, {"ih", {390, 1990, 2550}}, {"ey", {480, 2050, 2600}}, {"eh", {530, 1840, 2480}},
      {"ae", {660, 1720, 2410}}, {"aa", {730, 1090, 2440}}, {"ao", {570, 840, 2410}},  {"ah", {640, 1190, 2390}},
      {"ax", {500, 1500, 2500}}, {"ow", {450, 900, 2300}},  {"uh", {440, 1020, 2240}}, {"uw", {300, 870, 2240}},
      {"er", {490, 1350, 1690}}, {"ay", {700, 1200, 2500}}, {"aw", {700, 1100, 2400}}, {"oy", {550, 900, 2400}},
      {"el", {450, 1000, 2700}}, {"en", {300, 1500, 2600}}, {"dx", {400, 1600, 2600}}};
  static const std::unordered_map<std::string, std::array<double, 3>> sonorants = {
      {"m", {250, 1100, 2200}}, {"n", {250, 1500, 2500}}, {"ng", {250, 2000, 2700}}, {"l", {360, 1300, 2700}},
      {"r", {420, 1300, 1600}}, {"w", {300, 700, 2200}},  {"y", {280, 2200, 2900}}};
  static const std::unordered_map<std::string, double> place = {
      {"p", 800},  {"b", 800},  {"t", 4000}, {"d", 3500}, {"k", 2000}, {"g", 2000}, {"f", 6000},
      {"v", 6000}, {"th", 5500}, {"dh", 5500}, {"s", 5000}, {"z", 5000}, {"sh", 2800}, {"zh", 2800},
      {"ch", 2800}, {"jh", 2800}, {"hh", 1500}};
  Target t;
  if (auto it = vowels.find(p); it != vowels.end()) {
    t.formants = it->second;
    t.voice = p == "dx" ? 0.3 : 1.0;
    return t;
  }
  if (auto it = sonorants.find(p); it != sonorants.end()) {
    t.formants = it->second;
    t.voice = fs.has_feature(fs.id(p), "nasal") ? 0.25 : 0.5;
    return t;
  }
  if (p == "q") {
    t.voice = 0.02;
    return t;
  }
  const auto id = fs.id(p);
  const bool voiced = fs.has_feature(id, "voiced");
  if (auto it = place.find(p); it != place.end()) t.noise_fc = it->second;
  if (fs.has_feature(id, "stop") || fs.has_feature(id, "affricate")) {
    t.closure = fs.has_feature(id, "affricate") ? 0.5 : 0.7;
    t.closure_voice = voiced ? 0.04 : 0.0;
    t.noise = fs.has_feature(id, "affricate") ? 0.2 : 0.15;
    t.voice = voiced ? 0.05 : 0.0;
  } else {
    t.noise = (p == "s" || p == "z" || p == "sh" || p == "zh") ? 0.2 : p == "hh" ? 0.1 : 0.05;
    t.voice = voiced ? 0.15 : 0.0;
  }
  return t;
}

struct Resonator {
  double a = 0, b = 0, c = 0, y1 = 0, y2 = 0;
  void set(double f, double bw, double fs) {
    c = -std::exp(-2.0 * kPi * bw / fs);
    b = 2.0 * std::exp(-kPi * bw / fs) * std::cos(2.0 * kPi * f / fs);
    a = 1.0 - b - c;
  }
  double step(double x) {
    const double y = a * x + b * y1 + c * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

}  // namespace

AudioBuffer render_formants(const LinguisticRep& rep, std::span<const double> durations_ms, const FeatureSystem& fs,
                            Rng& rng, int sample_rate) {
  const auto refs = flatten(rep);
  if (refs.size() != durations_ms.size()) throw InvalidInput("render_formants: one duration per phone required");
  double total = 0.0;
  for (double d : durations_ms) total += d;
  const double sr = sample_rate;
  const auto body = static_cast<std::size_t>(std::llround(total * sr / 1000.0));
  const std::size_t tail = static_cast<std::size_t>(sr * 0.03);
  AudioBuffer out;
  out.sample_rate = sample_rate;
  out.samples.assign(body + tail, 0.0);

  std::vector<Target> targets;
  std::vector<bool> accented;
  for (const auto& r : refs) {
    targets.push_back(phone_target(phone_at(rep, r), fs));
    const auto& syl = rep.words[r.word].syllables[r.syllable];
    accented.push_back(syl.pitch_accent && r.phone == syl.nucleus);
  }
  std::array<Resonator, 3> vocal;
  Resonator frication;
  std::array<double, 3> fm = targets.empty() ? std::array<double, 3>{500, 1500, 2500} : targets[0].formants;
  double voice = 0.0, noise = 0.0, fc = targets.empty() ? 4000.0 : targets[0].noise_fc, f0 = 120.0;
  double glottal = 0.0, phase = 0.0;
  const double smooth = 1.0 - std::exp(-1.0 / (0.006 * sr));  // ~6 ms parameter glide
  std::size_t phone = 0;
  double phone_start = 0.0;
  const std::array<double, 3> bws{60.0, 90.0, 150.0};
  for (std::size_t n = 0; n < body; ++n) {
    const double t_ms = 1000.0 * static_cast<double>(n) / sr;
    while (phone + 1 < refs.size() && t_ms >= phone_start + durations_ms[phone]) phone_start += durations_ms[phone++];
    const auto& tg = targets[phone];
    const double frac = (t_ms - phone_start) / durations_ms[phone];
    const bool closed = frac < tg.closure;
    const double want_voice = closed ? tg.closure_voice : tg.voice;
    const double want_noise = closed ? 0.0 : tg.noise;
    double want_f0 = 125.0 - 30.0 * t_ms / std::max(total, 1.0);
    if (accented[phone]) want_f0 += 15.0 * std::sin(kPi * frac);
    for (std::size_t k = 0; k < 3; ++k) fm[k] += smooth * (tg.formants[k] - fm[k]);
    voice += smooth * (want_voice - voice);
    noise += (closed ? 0.5 : smooth) * (want_noise - noise);
    fc += smooth * (tg.noise_fc - fc);
    f0 += smooth * (want_f0 - f0);

    phase += f0 / sr;
    double src = 0.0;
    if (phase >= 1.0) {
      phase -= 1.0;
      src = 1.0;
    }
    glottal = 0.9 * glottal + src;  // spectral tilt
    double v = glottal * 0.1;
    for (std::size_t k = 0; k < 3; ++k) {
      vocal[k].set(fm[k], bws[k], sr);
      v = vocal[k].step(v);
    }
    frication.set(std::min(fc, 0.45 * sr), 1000.0, sr);
    const double nz = frication.step(rng.normal()) * 0.3;
    out.samples[n] = voice * v + noise * nz;
  }
  double peak = 0.0;
  for (double s : out.samples) peak = std::max(peak, std::abs(s));
  if (peak > 0.0)
    for (auto& s : out.samples) s *= 0.5 / peak;
  // Keep the level on the PCM16 grid so a WAV round trip is lossless.
  for (auto& s : out.samples) s = std::round(s * 32768.0) / 32768.0;
  return out;
}

std::vector<LabeledUtterance> gen_flapping_corpus(const std::vector<TaggedSentence>& corpus, const Lexicon& lex,
                                                  const FeatureSystem& fs, std::uint64_t seed, std::size_t size) {
  Rng rng(seed);
  std::vector<LabeledUtterance> out;
  for (const auto& rep : sample_reps(corpus, lex, size, rng)) {
    auto u = to_labeled(rep);
    const auto surface = flapping_surface(rep, fs);
    for (std::size_t w = 0; w < u.words.size(); ++w) u.words[w].surface = surface[w];
    out.push_back(std::move(u));
  }
  return out;
}

std::vector<LabeledUtterance> gen_duration_corpus(const std::vector<TaggedSentence>& corpus, const Lexicon& lex,
                                                  const FeatureSystem& fs, std::uint64_t seed, std::size_t size) {
  Rng rng(seed);
  std::vector<LabeledUtterance> out;
  for (const auto& rep : sample_reps(corpus, lex, size, rng)) {
    auto u = to_labeled(rep);
    const auto d = klatt_durations(rep, fs, rng);
    std::size_t k = 0;
    for (auto& w : u.words) {
      std::size_t n = 0;
      for (const auto& s : w.pronunciation) n += s.phones.size();
      w.durations = std::vector<double>(d.begin() + static_cast<std::ptrdiff_t>(k),
                                        d.begin() + static_cast<std::ptrdiff_t>(k + n));
      k += n;
    }
    out.push_back(std::move(u));
  }
  return out;
}

AudioCorpus gen_vowel_corpus(const std::vector<TaggedSentence>& corpus, const Lexicon& lex, const FeatureSystem& fs,
                             std::uint64_t seed, std::size_t size) {
  AudioCorpus out;
  out.labels = gen_duration_corpus(corpus, lex, fs, seed, size);
  Rng rng(seed ^ 0xa0d10ULL);
  for (std::size_t i = 0; i < out.labels.size(); ++i) {
    auto& u = out.labels[i];
    char name[32];
    std::snprintf(name, sizeof name, "utt%04zu.wav", i);
    u.audio = name;
    out.audio.push_back(render_formants(u.rep(), u.durations(), fs, rng));
  }
  return out;
}

void save_audio_corpus(const AudioCorpus& corpus, const std::filesystem::path& label_file) {
  if (corpus.audio.size() != corpus.labels.size()) throw InvalidInput("audio corpus: one buffer per utterance");
  const auto dir = label_file.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < corpus.labels.size(); ++i) write_wav(corpus.audio[i], dir / corpus.labels[i].audio);
  save_labels(label_file, corpus.labels);
}

double identity_rate(const std::vector<LabeledUtterance>& corpus) {
  std::size_t same = 0, total = 0;
  for (const auto& u : corpus) {
    for (const auto& w : u.words) {
      if (!w.surface) throw DataError("identity_rate: word '" + w.orthography + "' has no surface labels");
      std::size_t k = 0;
      for (const auto& s : w.pronunciation)
        for (const auto& p : s.phones) {
          same += (*w.surface)[k++] == p;
          ++total;
        }
    }
  }
  return total ? 100.0 * static_cast<double>(same) / static_cast<double>(total) : 0.0;
}

}  // namespace nts
