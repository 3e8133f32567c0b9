// nts: train the models and synthesize speech from text.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "nts/align.hpp"
#include "nts/corpus.hpp"
#include "nts/error.hpp"
#include "nts/pipeline.hpp"
#include "nts/random.hpp"
#include "nts/vocoder.hpp"
#include "nts/wav.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kModel = 3 };

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool trace = false;
};

nts::PipelineConfig load_config(const Globals& g) {
  auto cfg = g.config.empty() ? nts::PipelineConfig::defaults(std::filesystem::current_path() / "nts-work")
                              : nts::PipelineConfig::load(g.config);
  if (g.seed) cfg.seed = *g.seed;
  return cfg;
}

std::string slurp(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw nts::DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_report(const nts::TrainReport& r) {
  std::cout << nts::to_string(r.stage) << " -> " << r.output.string() << '\n';
  for (const auto& m : r.metrics) std::cout << "  " << std::left << std::setw(28) << m.name << m.value << '\n';
}

int align_test(std::size_t trials, std::uint64_t seed) {
  nts::Rng rng(seed);
  const std::vector<std::string> alphabet{"a", "b", "c", "d"};
  std::size_t mismatches = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    auto seq = [&] {
      nts::Symbols s(rng.below(7));
      for (auto& x : s) x = alphabet[rng.below(alphabet.size())];
      return s;
    };
    const auto a = seq(), b = seq();
    std::map<std::pair<std::string, std::string>, double> table;
    for (const auto& x : alphabet)
      for (const auto& y : alphabet) table[{x, y}] = x == y ? 0.0 : std::round(rng.uniform(0.0, 3.0) * 4.0) / 4.0;
    nts::CostModel cm{[&](std::string_view x, std::string_view y) { return table.at({std::string(x), std::string(y)}); },
                      std::round(rng.uniform(0.25, 2.0) * 4.0) / 4.0, std::round(rng.uniform(0.25, 2.0) * 4.0) / 4.0};
    if (nts::align(a, b, cm).total_cost != nts::brute_force_align(a, b, cm).total_cost) ++mismatches;
  }
  std::cout << trials << " random pairs, " << mismatches << " cost mismatches against exhaustive search\n";
  return mismatches ? kData : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nts: neural text-to-speech pipeline"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Pipeline config file (key = value)");
  app.add_option("--seed", g.seed, "Override the config seed");

  auto* train = app.add_subcommand("train", "Train a stage, or 'all' (generates the corpora first)");
  std::string stage;
  train->add_option("stage", stage, "tagger | g2p | postlex | duration | acoustic | all")->required();

  auto* say = app.add_subcommand("say", "Synthesize text to a WAV file");
  std::string text, out_wav = "out.wav", copy_frames;
  say->add_option("text", text, "Text to speak ('-' reads stdin)");
  say->add_option("-o,--output", out_wav, "Output WAV");
  say->add_flag("--trace", g.trace, "Print the per-stage trace");
  say->add_option("--copy-frames", copy_frames, "Synthesize a frame dump directly, bypassing the networks");

  auto* analyze = app.add_subcommand("analyze", "Vocoder analysis of a WAV file into a frame dump");
  std::string in_wav, frames_out = "-";
  analyze->add_option("wav", in_wav, "Input WAV (PCM16 mono)")->required();
  analyze->add_option("-o,--output", frames_out, "Frame dump ('-' for stdout)");

  auto* synth = app.add_subcommand("synth", "Synthesize a frame dump to a WAV file");
  std::string frames_in;
  synth->add_option("frames", frames_in, "Frame dump")->required();
  synth->add_option("-o,--output", out_wav, "Output WAV");

  auto* gen = app.add_subcommand("gen-corpus", "Write a synthetic corpus to its configured path");
  std::string kind;
  std::optional<std::size_t> size;
  gen->add_option("kind", kind, "flapping | durations | vowels | all")->required();
  gen->add_option("--size", size, "Utterances (default from config)");

  auto* bench = app.add_subcommand("bench", "Real-time factor over a text file, one sentence per line");
  std::string bench_file;
  std::size_t repeats = 1;
  bench->add_option("text_file", bench_file, "Text file")->required();
  bench->add_option("--repeat", repeats, "Runs to report")->check(CLI::PositiveNumber);

  auto* align = app.add_subcommand("align-test", "Check the aligner against exhaustive search");
  std::size_t trials = 200;
  align->add_option("--trials", trials, "Random sequence pairs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*align) return align_test(trials, g.seed.value_or(1));

    if (*synth) {
      const auto cfg = load_config(g);
      const auto frames = nts::read_frames(std::filesystem::path(frames_in));
      nts::write_wav(nts::synthesize(frames, cfg.vocoder), out_wav);
      std::cout << frames.size() << " frames -> " << out_wav << '\n';
      return kOk;
    }
    if (*analyze) {
      const auto cfg = load_config(g);
      const auto frames = nts::analyze(nts::read_wav(in_wav), cfg.vocoder);
      if (frames_out == "-") nts::write_frames(std::cout, frames);
      else nts::write_frames(std::filesystem::path(frames_out), frames);
      return kOk;
    }

    const auto cfg = load_config(g);
    if (*train) {
      if (stage == "all") {
        for (const auto& r : nts::train_all(cfg)) print_report(r);
      } else {
        print_report(nts::train_stage(nts::parse_stage(stage), cfg));
      }
      return kOk;
    }
    if (*gen) {
      auto c = cfg;
      if (size) c.flapping_size = c.duration_size = c.vowel_size = *size;
      std::vector<nts::CorpusKind> kinds;
      if (kind == "all") kinds = {nts::CorpusKind::Flapping, nts::CorpusKind::Durations, nts::CorpusKind::Vowels};
      else kinds = {nts::parse_corpus_kind(kind)};
      for (auto k : kinds) {
        nts::generate_corpus(k, c);
        const auto& path = k == nts::CorpusKind::Flapping    ? c.flapping_corpus
                           : k == nts::CorpusKind::Durations ? c.duration_corpus
                                                             : c.vowel_corpus;
        std::cout << nts::to_string(k) << " -> " << path.string();
        if (k == nts::CorpusKind::Flapping) {
          const auto fs = nts::FeatureSystem::load(c.phones, c.letters);
          std::cout << " (identity " << std::fixed << std::setprecision(1)
                    << nts::identity_rate(nts::load_labels(path, fs)) << "%)";
        }
        std::cout << '\n';
      }
      return kOk;
    }
    if (*say) {
      if (!copy_frames.empty()) {
        const auto frames = nts::read_frames(std::filesystem::path(copy_frames));
        const auto audio = nts::synthesize(frames, cfg.vocoder);
        nts::write_wav(audio, out_wav);
        std::cout << frames.size() << " frames, " << audio.duration_ms() << " ms -> " << out_wav << '\n';
        return kOk;
      }
      if (text.empty()) throw nts::InvalidInput("say: no text given");
      if (text == "-") text = slurp("-");
      const auto models = nts::Models::load(cfg);
      const auto res = nts::say(text, models);
      nts::write_wav(res.audio, out_wav);
      if (g.trace) std::cout << res.trace.format();
      std::cout << res.trace.frame_count << " frames, " << res.audio.duration_ms() << " ms -> " << out_wav << '\n';
      return kOk;
    }
    if (*bench) {
      const auto models = nts::Models::load(cfg);
      const auto body = slurp(bench_file);
      for (std::size_t r = 0; r < repeats; ++r) {
        const auto rep = nts::bench(body, models);
        std::cout << "sentences " << rep.sentences << "  audio " << std::fixed << std::setprecision(2)
                  << rep.audio_seconds << " s  compute " << std::setprecision(3) << rep.compute_seconds
                  << " s  rtf " << std::setprecision(4) << rep.real_time_factor() << '\n';
      }
      return kOk;
    }
  } catch (const nts::ModelError& e) {
    std::cerr << "model error: " << e.what() << '\n';
    return kModel;
  } catch (const nts::InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const nts::Error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
