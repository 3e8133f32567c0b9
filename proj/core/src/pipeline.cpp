#include "nts/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include "nts/corpus.hpp"
#include "nts/error.hpp"
#include "nts/labels.hpp"
#include "nts/wav.hpp"
#include "text_util.hpp"

namespace nts {

namespace fs_ = std::filesystem;

fs_::path default_data_dir() {
  if (const char* env = std::getenv("NTS_DATA_DIR"); env && *env) return env;
  const fs_::path source = NTS_SOURCE_DATA_DIR;
  if (fs_::exists(source / "phones.txt")) return source;
  return NTS_INSTALL_DATA_DIR;
}

// ---------------------------------------------------------------------------
// Config

namespace {

std::uint64_t parse_u64(std::string_view v) {
  std::size_t pos = 0;
  const std::string s(v);
  if (s.empty() || s[0] == '-') throw std::invalid_argument("expected a non-negative integer");
  const auto x = std::stoull(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("expected a non-negative integer");
  return x;
}

double parse_double(std::string_view v) {
  std::size_t pos = 0;
  const std::string s(v);
  const double x = std::stod(s, &pos);
  if (pos != s.size() || !std::isfinite(x)) throw std::invalid_argument("expected a number");
  return x;
}

std::string fmt(double x) {
  std::ostringstream ss;
  ss << std::setprecision(17) << x;
  return ss.str();
}

struct Field {
  std::function<void(PipelineConfig&, std::string_view, const fs_::path&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

Field path_field(fs_::path PipelineConfig::*m) {
  return {[m](PipelineConfig& c, std::string_view v, const fs_::path& base) {
            const fs_::path p(v);
            c.*m = p.is_absolute() ? p : (base / p).lexically_normal();
          },
          [m](const PipelineConfig& c) { return (c.*m).string(); }};
}

template <class T>
Field size_field(T PipelineConfig::*m) {
  return {[m](PipelineConfig& c, std::string_view v, const fs_::path&) { c.*m = static_cast<T>(parse_u64(v)); },
          [m](const PipelineConfig& c) { return std::to_string(c.*m); }};
}

Field real_field(double PipelineConfig::*m) {
  return {[m](PipelineConfig& c, std::string_view v, const fs_::path&) { c.*m = parse_double(v); },
          [m](const PipelineConfig& c) { return fmt(c.*m); }};
}

void add_budget(std::map<std::string, Field>& f, const std::string& prefix, NetBudget PipelineConfig::*b) {
  f[prefix + "_hidden"] = {[b](PipelineConfig& c, std::string_view v, const fs_::path&) { (c.*b).hidden = parse_u64(v); },
                           [b](const PipelineConfig& c) { return std::to_string((c.*b).hidden); }};
  f[prefix + "_epochs"] = {[b](PipelineConfig& c, std::string_view v, const fs_::path&) { (c.*b).epochs = parse_u64(v); },
                           [b](const PipelineConfig& c) { return std::to_string((c.*b).epochs); }};
  f[prefix + "_learning_rate"] = {
      [b](PipelineConfig& c, std::string_view v, const fs_::path&) { (c.*b).learning_rate = parse_double(v); },
      [b](const PipelineConfig& c) { return fmt((c.*b).learning_rate); }};
  f[prefix + "_batch_size"] = {
      [b](PipelineConfig& c, std::string_view v, const fs_::path&) { (c.*b).batch_size = parse_u64(v); },
      [b](const PipelineConfig& c) { return std::to_string((c.*b).batch_size); }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> f;
    using C = PipelineConfig;
    f["phones"] = path_field(&C::phones);
    f["letters"] = path_field(&C::letters);
    f["lexicon"] = path_field(&C::lexicon);
    f["tagged_corpus"] = path_field(&C::tagged_corpus);
    f["tagger"] = path_field(&C::tagger);
    f["g2p_weights"] = path_field(&C::g2p_weights);
    f["postlex_weights"] = path_field(&C::postlex_weights);
    f["duration_weights"] = path_field(&C::duration_weights);
    f["acoustic_weights"] = path_field(&C::acoustic_weights);
    f["duration_stats"] = path_field(&C::duration_stats);
    f["flapping_corpus"] = path_field(&C::flapping_corpus);
    f["duration_corpus"] = path_field(&C::duration_corpus);
    f["vowel_corpus"] = path_field(&C::vowel_corpus);
    f["duration_mode"] = {[](C& c, std::string_view v, const fs_::path&) { c.duration_mode = parse_duration_mode(v); },
                          [](const C& c) { return std::string(to_string(c.duration_mode)); }};
    f["seed"] = size_field(&C::seed);
    f["g2p_words"] = size_field(&C::g2p_words);
    f["flapping_size"] = size_field(&C::flapping_size);
    f["duration_size"] = size_field(&C::duration_size);
    f["vowel_size"] = size_field(&C::vowel_size);
    f["holdout_fraction"] = real_field(&C::holdout_fraction);
    add_budget(f, "g2p", &C::g2p);
    add_budget(f, "postlex", &C::postlex);
    add_budget(f, "duration", &C::duration);
    add_budget(f, "acoustic", &C::acoustic);
    f["voicing_threshold"] = {
        [](C& c, std::string_view v, const fs_::path&) { c.vocoder.voicing_threshold = parse_double(v); },
        [](const C& c) { return fmt(c.vocoder.voicing_threshold); }};
    f["noise_seed"] = {[](C& c, std::string_view v, const fs_::path&) { c.vocoder.noise_seed = parse_u64(v); },
                       [](const C& c) { return std::to_string(c.vocoder.noise_seed); }};
    f["fir_taps"] = {[](C& c, std::string_view v, const fs_::path&) { c.vocoder.fir_taps = parse_u64(v); },
                     [](const C& c) { return std::to_string(c.vocoder.fir_taps); }};
    f["filter_update_hz"] = {
        [](C& c, std::string_view v, const fs_::path&) { c.vocoder.filter_update_hz = parse_double(v); },
        [](const C& c) { return fmt(c.vocoder.filter_update_hz); }};
    return f;
  }();
  return table;
}

void require_file(const fs_::path& p, const char* key) {
  if (p.empty()) throw DataError(std::string("config: '") + key + "' is not set");
  if (!fs_::exists(p)) throw DataError(std::string("config: ") + key + " file " + p.string() + " does not exist");
}

void write_text(const fs_::path& path, const std::string& text) {
  if (path.has_parent_path()) fs_::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace

PipelineConfig PipelineConfig::defaults(const fs_::path& work_dir, const fs_::path& data_dir) {
  PipelineConfig c;
  c.phones = data_dir / "phones.txt";
  c.letters = data_dir / "letters.txt";
  c.lexicon = data_dir / "lexicon.tsv";
  c.tagged_corpus = data_dir / "tagged_corpus.txt";
  const auto models = work_dir / "models";
  c.tagger = models / "tagger.txt";
  c.g2p_weights = models / "g2p.nnw";
  c.postlex_weights = models / "postlex.nnw";
  c.duration_weights = models / "duration.nnw";
  c.acoustic_weights = models / "acoustic.nnw";
  c.duration_stats = models / "durstats.txt";
  const auto corpora = work_dir / "corpora";
  c.flapping_corpus = corpora / "flapping.lab";
  c.duration_corpus = corpora / "durations.lab";
  c.vowel_corpus = corpora / "vowels" / "vowels.lab";
  return c;
}

PipelineConfig PipelineConfig::parse(std::string_view text, const fs_::path& base_dir, const std::string& source) {
  PipelineConfig c = defaults(base_dir);
  const auto& table = fields();
  std::size_t line_no = 0;
  for (auto raw : detail::lines(text)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const auto line = detail::trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, line_no, "expected 'key = value'");
    const std::string key(detail::trim(line.substr(0, eq)));
    const auto value = detail::trim(line.substr(eq + 1));
    if (key == "version") {
      if (value != std::to_string(kVersion))
        throw ParseError(source, line_no, "config version " + std::string(value) + ", expected " + std::to_string(kVersion));
      continue;
    }
    const auto it = table.find(key);
    if (it == table.end()) throw ParseError(source, line_no, "unknown key '" + key + "'");
    try {
      it->second.set(c, value, base_dir);
    } catch (const std::exception& e) {
      throw ParseError(source, line_no, key + ": " + e.what());
    }
  }
  if (!(c.holdout_fraction > 0.0 && c.holdout_fraction < 1.0))
    throw DataError(source + ": holdout_fraction must lie in (0, 1)");
  require_file(c.phones, "phones");
  require_file(c.letters, "letters");
  require_file(c.lexicon, "lexicon");
  require_file(c.tagged_corpus, "tagged_corpus");
  return c;
}

PipelineConfig PipelineConfig::load(const fs_::path& path) {
  return parse(detail::read_file(path), fs_::absolute(path).parent_path(), path.string());
}

std::string PipelineConfig::serialize() const {
  std::string out = "version = " + std::to_string(kVersion) + "\n";
  for (const auto& [key, f] : fields()) out += key + " = " + f.get(*this) + "\n";
  return out;
}

void PipelineConfig::save(const fs_::path& path) const { write_text(path, serialize()); }

// ---------------------------------------------------------------------------
// Models

namespace {

Network load_checked(const fs_::path& path, const char* what, std::size_t in, std::size_t out) {
  if (!fs_::exists(path)) throw ModelError(std::string(what) + " weights not found: " + path.string());
  Network net;
  try {
    net = load_weights(path);
  } catch (const Error& e) {
    throw ModelError(std::string(what) + " weights: " + e.what());
  }
  if (net.input_size() != in || net.output_size() != out)
    throw ModelError(std::string(what) + " weights " + path.string() + " have shape " + std::to_string(net.input_size()) +
                     "->" + std::to_string(net.output_size()) + ", expected " + std::to_string(in) + "->" +
                     std::to_string(out));
  return net;
}

}  // namespace

Models Models::load(const PipelineConfig& cfg) {
  Models m;
  m.fs = FeatureSystem::load(cfg.phones, cfg.letters);
  m.lexicon = Lexicon::load(cfg.lexicon, m.fs);
  if (!fs_::exists(cfg.tagger)) throw ModelError("tagger model not found: " + cfg.tagger.string());
  m.tagger = TagModel::load(cfg.tagger);
  m.g2p = load_checked(cfg.g2p_weights, "g2p", g2p_input_size(m.fs), G2PAlphabet(m.fs).size());
  m.postlex = load_checked(cfg.postlex_weights, "postlex", postlex_input_size(m.fs), PostlexAlphabet(m.fs).size());
  m.duration = load_checked(cfg.duration_weights, "duration", duration_input_size(m.fs), 1);
  m.acoustic = load_checked(cfg.acoustic_weights, "acoustic", acoustic_input_size(m.fs), kFrameVectorSize);
  if (m.acoustic.feedback_frames() != kAcousticFeedback)
    throw ModelError("acoustic weights: expected " + std::to_string(kAcousticFeedback) + " feedback frames");
  if (!fs_::exists(cfg.duration_stats)) throw ModelError("duration stats not found: " + cfg.duration_stats.string());
  m.stats = DurationStats::load(cfg.duration_stats);
  m.mode = cfg.duration_mode;
  m.vocoder = cfg.vocoder;
  return m;
}

// ---------------------------------------------------------------------------
// Training

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Tagger: return "tagger";
    case Stage::G2P: return "g2p";
    case Stage::Postlex: return "postlex";
    case Stage::Duration: return "duration";
    case Stage::Acoustic: return "acoustic";
  }
  return "?";
}

Stage parse_stage(std::string_view s) {
  for (Stage st : {Stage::Tagger, Stage::G2P, Stage::Postlex, Stage::Duration, Stage::Acoustic})
    if (to_string(st) == s) return st;
  throw InvalidInput("unknown stage '" + std::string(s) + "' (tagger, g2p, postlex, duration, acoustic)");
}

double TrainReport::value(std::string_view name) const {
  for (const auto& m : metrics)
    if (m.name == name) return m.value;
  throw InvalidInput("report has no metric '" + std::string(name) + "'");
}

std::string_view to_string(CorpusKind k) {
  switch (k) {
    case CorpusKind::Flapping: return "flapping";
    case CorpusKind::Durations: return "durations";
    case CorpusKind::Vowels: return "vowels";
  }
  return "?";
}

CorpusKind parse_corpus_kind(std::string_view s) {
  for (CorpusKind k : {CorpusKind::Flapping, CorpusKind::Durations, CorpusKind::Vowels})
    if (to_string(k) == s) return k;
  throw InvalidInput("unknown corpus kind '" + std::string(s) + "' (flapping, durations, vowels)");
}

namespace {

struct Language {
  FeatureSystem fs;
  Lexicon lex;
  std::vector<TaggedSentence> tagged;
};

Language load_language(const PipelineConfig& cfg) {
  Language l{FeatureSystem::load(cfg.phones, cfg.letters), {}, load_tagged_corpus(cfg.tagged_corpus)};
  l.lex = Lexicon::load(cfg.lexicon, l.fs);
  return l;
}

std::uint64_t stage_seed(const PipelineConfig& cfg, std::uint64_t salt) { return cfg.seed * 0x9e3779b97f4a7c15ULL + salt; }

TrainConfig train_config(const NetBudget& b, std::uint64_t seed, Loss loss) {
  TrainConfig t;
  t.learning_rate = b.learning_rate;
  t.epochs = b.epochs;
  t.batch_size = b.batch_size;
  t.seed = seed;
  t.loss = loss;
  return t;
}

template <class T>
std::pair<std::vector<T>, std::vector<T>> split_holdout(std::vector<T> all, double fraction) {
  const auto held = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(all.size()))));
  if (all.size() < 2) throw DataError("corpus needs at least two utterances for a held-out split");
  std::vector<T> test(std::make_move_iterator(all.end() - static_cast<std::ptrdiff_t>(held)),
                      std::make_move_iterator(all.end()));
  all.resize(all.size() - held);
  return {std::move(all), std::move(test)};
}

void write_metrics(const fs_::path& model, const std::vector<Metric>& metrics) {
  std::string text;
  for (const auto& m : metrics) text += m.name + " " + fmt(m.value) + "\n";
  write_text(fs_::path(model.string() + ".metrics"), text);
}

std::vector<LabeledUtterance> load_corpus(const fs_::path& path, const FeatureSystem& fs, const char* kind) {
  if (!fs_::exists(path))
    throw DataError(std::string(kind) + " corpus " + path.string() + " does not exist (run gen-corpus first)");
  return load_labels(path, fs);
}

TrainReport train_tagger_stage(const PipelineConfig& cfg) {
  const auto tagged = load_tagged_corpus(cfg.tagged_corpus);
  const auto model = train_tagger(tagged);
  std::size_t right = 0, total = 0;
  for (const auto& s : tagged) {
    Sentence tokens;
    for (const auto& [tok, tag] : s) tokens.push_back(tok);
    const auto tags = pos_tag(tokens, model);
    for (std::size_t i = 0; i < s.size(); ++i, ++total) right += tags[i] == s[i].second;
  }
  write_text(cfg.tagger, model.serialize());
  TrainReport r{Stage::Tagger, cfg.tagger, {{"sentences", static_cast<double>(tagged.size())},
                                            {"train_tag_accuracy", 100.0 * right / std::max<std::size_t>(total, 1)}}};
  write_metrics(cfg.tagger, r.metrics);
  return r;
}

TrainReport train_g2p_stage(const PipelineConfig& cfg) {
  const auto lang = load_language(cfg);
  const auto ds = build_g2p_dataset(lang.lex, lang.fs, letter_phone_cost(lang.fs), cfg.g2p_words);
  if (ds.samples.empty()) throw DataError("g2p: no alignable words in " + cfg.lexicon.string());
  const auto tc = train_config(cfg.g2p, stage_seed(cfg, 1), Loss::CrossEntropy);
  auto res = train(make_g2p_network(lang.fs, cfg.g2p.hidden, tc), ds.samples, tc);
  save_weights(res.net, cfg.g2p_weights);
  TrainReport r{Stage::G2P, cfg.g2p_weights,
                {{"words", static_cast<double>(ds.words.size())},
                 {"skipped_words", static_cast<double>(ds.skipped.size())},
                 {"letters", static_cast<double>(ds.samples.size())},
                 {"final_loss", res.loss_curve.back()},
                 {"train_letter_accuracy", 100.0 * classification_accuracy(res.net, ds.samples)}}};
  write_metrics(cfg.g2p_weights, r.metrics);
  return r;
}

std::vector<PostlexExample> postlex_examples(const std::vector<LabeledUtterance>& corpus) {
  std::vector<PostlexExample> out;
  for (const auto& u : corpus) {
    if (!u.has_surface()) throw DataError("postlex corpus: utterance without surface labels");
    out.push_back({u.rep(), u.surface()});
  }
  return out;
}

double postlex_accuracy(const Network& net, const PostlexDataset& ds, const FeatureSystem& fs,
                        double* identity = nullptr) {
  const PostlexAlphabet alphabet(fs);
  std::vector<std::string> pred;
  for (const auto& s : ds.samples) {
    const auto y = forward(net, s.input);
    pred.push_back(alphabet.symbol(static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin())));
  }
  const auto m = postlex_metrics(pred, ds.reference, ds.lexical);
  if (identity) *identity = m.identity_baseline;
  return m.accuracy;
}

TrainReport train_postlex_stage(const PipelineConfig& cfg) {
  const auto fs = FeatureSystem::load(cfg.phones, cfg.letters);
  auto [train_u, test_u] = split_holdout(load_corpus(cfg.flapping_corpus, fs, "postlex"), cfg.holdout_fraction);
  const auto train_x = postlex_examples(train_u), test_x = postlex_examples(test_u);
  const auto train_ds = build_postlex_dataset(train_x, fs), test_ds = build_postlex_dataset(test_x, fs);
  if (train_ds.samples.empty() || test_ds.samples.empty()) throw DataError("postlex: no usable utterances");
  const auto tc = train_config(cfg.postlex, stage_seed(cfg, 2), Loss::CrossEntropy);
  auto res = train(make_postlex_network(fs, cfg.postlex.hidden, tc), train_ds.samples, tc);
  save_weights(res.net, cfg.postlex_weights);
  double identity = 0.0;
  const double held = postlex_accuracy(res.net, test_ds, fs, &identity);
  TrainReport r{Stage::Postlex, cfg.postlex_weights,
                {{"train_phones", static_cast<double>(train_ds.samples.size())},
                 {"heldout_phones", static_cast<double>(test_ds.samples.size())},
                 {"skipped_utterances", static_cast<double>(train_ds.skipped + test_ds.skipped)},
                 {"final_loss", res.loss_curve.back()},
                 {"train_accuracy", postlex_accuracy(res.net, train_ds, fs)},
                 {"heldout_accuracy", held},
                 {"heldout_identity_baseline", identity}}};
  write_metrics(cfg.postlex_weights, r.metrics);
  return r;
}

std::vector<DurationExample> duration_examples(const std::vector<LabeledUtterance>& corpus) {
  std::vector<DurationExample> out;
  for (const auto& u : corpus) {
    if (!u.has_durations()) throw DataError("duration corpus: utterance without durations");
    out.push_back({u.rep(), u.durations()});
  }
  return out;
}

TrainReport train_duration_stage(const PipelineConfig& cfg) {
  const auto fs = FeatureSystem::load(cfg.phones, cfg.letters);
  auto [train_u, test_u] = split_holdout(load_corpus(cfg.duration_corpus, fs, "duration"), cfg.holdout_fraction);
  const auto train_x = duration_examples(train_u), test_x = duration_examples(test_u);
  const auto stats = phone_stats(duration_tokens(train_x));
  const auto data = build_duration_dataset(train_x, fs, stats, cfg.duration_mode);
  const auto tc = train_config(cfg.duration, stage_seed(cfg, 3), Loss::MeanSquared);
  auto res = train(make_duration_network(fs, cfg.duration.hidden, tc), data, tc);
  save_weights(res.net, cfg.duration_weights);
  write_text(cfg.duration_stats, stats.serialize());
  TrainReport r{Stage::Duration, cfg.duration_weights,
                {{"train_phones", static_cast<double>(data.size())},
                 {"final_loss", res.loss_curve.back()},
                 {"train_mae_ms", duration_mae(train_x, res.net, stats, cfg.duration_mode, fs)},
                 {"heldout_mae_ms", duration_mae(test_x, res.net, stats, cfg.duration_mode, fs)},
                 {"heldout_phone_mean_mae_ms", phone_mean_mae(test_x, stats)}}};
  write_metrics(cfg.duration_weights, r.metrics);
  return r;
}

std::vector<AcousticExample> acoustic_examples(const std::vector<LabeledUtterance>& corpus, const fs_::path& dir) {
  std::vector<AcousticExample> out;
  for (const auto& u : corpus) {
    if (u.audio.empty()) throw DataError("acoustic corpus: utterance without an '@ file.wav' line");
    if (!u.has_durations()) throw DataError("acoustic corpus: utterance " + u.audio + " has no durations");
    auto rep = u.rep();
    if (u.has_surface()) rep = apply_surface(rep, u.surface());
    auto durs = u.durations();
    if (rep.phone_count() != durs.size())
      throw DataError("acoustic corpus: utterance " + u.audio + " deletes phones; durations must cover surface phones");
    out.push_back({std::move(rep), std::move(durs), read_wav(dir / u.audio)});
  }
  return out;
}

double mean_loss(const Network& net, std::span<const Sample> data) {
  double sum = 0.0;
  for (const auto& s : data) sum += loss_value(net, s, Loss::MeanSquared);
  return data.empty() ? 0.0 : sum / static_cast<double>(data.size());
}

TrainReport train_acoustic_stage(const PipelineConfig& cfg) {
  const auto fs = FeatureSystem::load(cfg.phones, cfg.letters);
  auto [train_u, test_u] = split_holdout(load_corpus(cfg.vowel_corpus, fs, "acoustic"), cfg.holdout_fraction);
  const auto dir = cfg.vowel_corpus.parent_path();
  const auto train_ds = build_frame_dataset(acoustic_examples(train_u, dir), fs, cfg.vocoder);
  const auto test_ds = build_frame_dataset(acoustic_examples(test_u, dir), fs, cfg.vocoder);
  const auto tc = train_config(cfg.acoustic, stage_seed(cfg, 4), Loss::MeanSquared);
  auto res = train(make_acoustic_network(fs, cfg.acoustic.hidden, tc), train_ds, tc);
  save_weights(res.net, cfg.acoustic_weights);
  TrainReport r{Stage::Acoustic, cfg.acoustic_weights,
                {{"train_frames", static_cast<double>(train_ds.size())},
                 {"final_loss", res.loss_curve.back()},
                 {"train_frame_mse", mean_loss(res.net, train_ds)},
                 {"heldout_frame_mse", mean_loss(res.net, test_ds)}}};
  write_metrics(cfg.acoustic_weights, r.metrics);
  return r;
}

}  // namespace

TrainReport train_stage(Stage stage, const PipelineConfig& cfg) {
  for (const auto& p : {cfg.tagger, cfg.g2p_weights, cfg.postlex_weights, cfg.duration_weights, cfg.acoustic_weights,
                        cfg.duration_stats})
    if (p.has_parent_path()) fs_::create_directories(p.parent_path());
  switch (stage) {
    case Stage::Tagger: return train_tagger_stage(cfg);
    case Stage::G2P: return train_g2p_stage(cfg);
    case Stage::Postlex: return train_postlex_stage(cfg);
    case Stage::Duration: return train_duration_stage(cfg);
    case Stage::Acoustic: return train_acoustic_stage(cfg);
  }
  throw InvalidInput("bad stage");
}

void generate_corpus(CorpusKind kind, const PipelineConfig& cfg) {
  const auto lang = load_language(cfg);
  for (const auto& p : {cfg.flapping_corpus, cfg.duration_corpus, cfg.vowel_corpus})
    if (p.has_parent_path()) fs_::create_directories(p.parent_path());
  switch (kind) {
    case CorpusKind::Flapping:
      save_labels(cfg.flapping_corpus,
                  gen_flapping_corpus(lang.tagged, lang.lex, lang.fs, stage_seed(cfg, 11), cfg.flapping_size));
      break;
    case CorpusKind::Durations:
      save_labels(cfg.duration_corpus,
                  gen_duration_corpus(lang.tagged, lang.lex, lang.fs, stage_seed(cfg, 12), cfg.duration_size));
      break;
    case CorpusKind::Vowels:
      save_audio_corpus(gen_vowel_corpus(lang.tagged, lang.lex, lang.fs, stage_seed(cfg, 13), cfg.vowel_size),
                        cfg.vowel_corpus);
      break;
  }
}

std::vector<TrainReport> train_all(const PipelineConfig& cfg) {
  for (auto k : {CorpusKind::Flapping, CorpusKind::Durations, CorpusKind::Vowels}) generate_corpus(k, cfg);
  std::vector<TrainReport> out;
  for (auto s : {Stage::Tagger, Stage::G2P, Stage::Postlex, Stage::Duration, Stage::Acoustic})
    out.push_back(train_stage(s, cfg));
  return out;
}

// ---------------------------------------------------------------------------
// Synthesis

double SynthesisTrace::total_duration_ms() const {
  double s = 0.0;
  for (double d : durations) s += d;
  return s;
}

std::string SynthesisTrace::format() const {
  std::ostringstream out;
  out << "tokens:";
  for (const auto& t : tokens) out << ' ' << t;
  out << '\n';
  for (const auto& w : words) {
    out << "word\t" << w.token << '\t' << w.tag << '\t' << w.source << '\t' << w.lexical << '\t';
    for (std::size_t i = 0; i < w.surface.size(); ++i) out << (i ? "-" : "") << w.surface[i];
    out << '\n';
  }
  out << "phones:";
  for (const auto& p : phones) out << ' ' << p;
  out << "\ndurations_ms:" << std::fixed << std::setprecision(1);
  for (double d : durations) out << ' ' << d;
  out << "\ntotal_duration_ms: " << total_duration_ms() << "\nframes: " << frame_count << "\naudio_ms: " << audio_ms
      << '\n';
  return out.str();
}

namespace {

template <class F>
auto run_stage(std::string_view name, F&& f) -> decltype(f()) {
  const std::string prefix = std::string(name) + ": ";
  try {
    return f();
  } catch (const ModelError& e) {
    throw ModelError(prefix + e.what());
  } catch (const DataError& e) {
    throw DataError(prefix + e.what());
  } catch (const InvalidInput& e) {
    throw InvalidInput(prefix + e.what());
  } catch (const Error& e) {
    throw Error(prefix + e.what());
  }
}

}  // namespace

SayResult say(std::string_view text, const Models& m) {
  SayResult out;
  auto& trace = out.trace;
  const auto sentences = run_stage("tokenize", [&] { return tokenize(text); });
  LinguisticRep rep;
  for (const auto& sentence : sentences) {
    const auto tags = run_stage("tag", [&] { return pos_tag(sentence, m.tagger, &m.lexicon); });
    std::vector<std::vector<Syllable>> prons;
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      trace.tokens.push_back(sentence[i]);
      if (is_punctuation(sentence[i])) continue;
      WordTrace w{sentence[i], tags[i], "lexicon", "", {}};
      auto pron = run_stage("lookup", [&] { return lookup(sentence[i], tags[i], m.lexicon); });
      if (!pron) {
        w.source = "g2p";
        pron = run_stage("g2p", [&] { return g2p_pronounce(sentence[i], m.g2p, m.fs); });
      }
      w.lexical = format_pronunciation(*pron);
      prons.push_back(std::move(*pron));
      trace.words.push_back(std::move(w));
    }
    if (prons.empty()) continue;
    auto part = run_stage("lookup", [&] { return build_rep(sentence, tags, prons); });
    for (auto& w : part.words) rep.words.push_back(std::move(w));
  }
  if (rep.words.empty()) {
    out.audio.sample_rate = m.vocoder.sample_rate;
    return out;
  }

  const auto classes = run_stage("postlex", [&] { return postlex_classes(rep, m.postlex, m.fs); });
  for (std::size_t w = 0; w < classes.size(); ++w) trace.words[w].surface = classes[w];
  const auto surface = run_stage("postlex", [&] { return apply_surface(rep, classes); });
  for (const auto& r : flatten(surface)) trace.phones.push_back(phone_at(surface, r));
  trace.durations =
      run_stage("duration", [&] { return predict_durations(surface, m.duration, m.stats, m.mode, m.fs); });
  out.frames =
      run_stage("acoustic", [&] { return generate_frames(surface, trace.durations, m.acoustic, m.fs, m.vocoder); });
  trace.frame_count = out.frames.size();
  out.audio = run_stage("vocoder", [&] { return synthesize(out.frames, m.vocoder); });
  trace.audio_ms = out.audio.duration_ms();
  return out;
}

BenchReport bench(std::string_view text, const Models& models) {
  BenchReport r;
  for (auto line : detail::lines(text)) {
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = say(line, models);
    const auto t1 = std::chrono::steady_clock::now();
    r.compute_seconds += std::chrono::duration<double>(t1 - t0).count();
    r.audio_seconds += res.audio.duration_ms() / 1000.0;
    ++r.sentences;
  }
  return r;
}

}  // namespace nts
