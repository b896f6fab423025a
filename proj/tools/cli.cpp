#include "cli.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/os.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "modkalm/enhancer.hpp"
#include "modkalm/metrics.hpp"
#include "modkalm/wav.hpp"

namespace modkalm::cli {
namespace {

namespace fs = std::filesystem;

// Bad arguments detected after CLI11 parsing; maps to kExitUsage.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input/output problems; maps to kExitFailure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void SetUpLogging() {
  auto logger = spdlog::get("modkalm");
  if (!logger) logger = spdlog::stderr_logger_st("modkalm");
  logger->set_pattern("modkalm: %l: %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("MODKALM_LOG"); env != nullptr && *env != '\0') {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"; only accept it when asked for.
    if (level == spdlog::level::off && std::string_view(env) != "off") {
      spdlog::warn("ignoring unknown MODKALM_LOG level '{}'", env);
    } else {
      spdlog::set_level(level);
    }
  }
}

// Options shared by all subcommands. Optional values stay unset unless given
// on the command line or in the config file.
struct CommonOptions {
  std::string mode = "mdkr";
  std::optional<int> speech_order;
  std::optional<int> noise_order;
  double frame_ms = 32.0;
  double inc_ms = 8.0;
  double mod_frame_ms = 64.0;
  int ring_cap = 64;
  int workers = 1;
  std::optional<int> expect_rate;
  std::string out_dir = ".";
  std::string config_path;
};

void AddCommonOptions(CLI::App& app, CommonOptions& o, bool with_mode) {
  if (with_mode) {
    app.add_option("--mode", o.mode, "Enhancer: mdkm, mdkr or logmmse")->capture_default_str();
  }
  app.add_option("--p", o.speech_order, "Speech LPC order (default 3)");
  app.add_option("--q", o.noise_order, "Noise LPC order (default 4 for mdkr, 0 for mdkm)");
  app.add_option("--frame-ms", o.frame_ms, "Acoustic frame length in ms")->capture_default_str();
  app.add_option("--inc-ms", o.inc_ms, "Acoustic frame increment in ms")->capture_default_str();
  app.add_option("--mod-frame-ms", o.mod_frame_ms, "Modulation frame length in ms")
      ->capture_default_str();
  app.add_option("--ring-cap", o.ring_cap, "Maximum components per ring")->capture_default_str();
  app.add_option("--workers", o.workers, "Worker threads per file (frequency bins)")
      ->capture_default_str();
  app.add_option("--expect-rate", o.expect_rate, "Reject inputs at any other sample rate");
  app.add_option("-o,--out", o.out_dir, "Output directory")->capture_default_str();
  app.add_option("--config", o.config_path, "key=value file with defaults for these options");
}

std::string Trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Applies `key = value` lines to options not given on the command line.
// Keys are long option names without the dashes; '#' starts a comment.
void ApplyConfigFile(CLI::App& app, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(fmt::format("{}:{}: expected key=value", path, line_no));
    }
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    CLI::Option* opt = key == "config" ? nullptr : app.get_option_no_throw("--" + key);
    if (opt == nullptr) {
      throw UsageError(fmt::format("{}:{}: unknown key '{}'", path, line_no, key));
    }
    if (opt->count() > 0) continue;  // the command line wins
    try {
      for (const auto& item : CLI::detail::split(value, ',')) opt->add_result(Trim(item));
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw UsageError(fmt::format("{}:{}: {}", path, line_no, e.what()));
    }
  }
}

EnhancerMode ParseModeOrThrow(const std::string& name) {
  if (auto mode = ParseMode(name)) return *mode;
  throw UsageError("unknown mode '" + name + "' (allowed: mdkm, mdkr, logmmse)");
}

// Builds the enhancer configuration for one mode and sample rate. With
// `noise_order_for_all` false an explicit --q only applies to MDKR.
EnhancerConfig MakeConfig(const CommonOptions& o, EnhancerMode mode, double sample_rate,
                          bool noise_order_for_all = true) {
  auto cfg = EnhancerConfig::ForMode(mode);
  if (!(o.frame_ms > 0.0) || !(o.inc_ms > 0.0) || !(o.mod_frame_ms > 0.0)) {
    throw UsageError("frame durations must be positive");
  }
  cfg.frame = FrameConfig::FromMilliseconds(sample_rate, o.frame_ms, o.inc_ms);
  const int mod_len = static_cast<int>(std::lround(o.mod_frame_ms / o.inc_ms));
  cfg.speech_mod.mod_frame_len = mod_len;
  cfg.noise_mod.mod_frame_len = mod_len;
  if (o.speech_order) cfg.speech_order = *o.speech_order;
  if (o.noise_order && (noise_order_for_all || mode == EnhancerMode::kMdkr)) {
    cfg.noise_order = *o.noise_order;
  }
  cfg.ring.max_components = o.ring_cap;
  cfg.workers = o.workers;
  try {
    cfg.Validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

// Expands arguments containing wildcards against the directory they name;
// plain paths must exist.
std::vector<fs::path> ResolveInputs(const std::vector<std::string>& args) {
  std::vector<fs::path> out;
  for (const auto& arg : args) {
    const fs::path p(arg);
    if (arg.find_first_of("*?[") == std::string::npos) {
      if (!fs::is_regular_file(p)) throw IoError("no such file: " + arg);
      out.push_back(p);
      continue;
    }
    const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
    const std::string pattern = p.filename().string();
    std::vector<fs::path> hits;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
      if (entry.is_regular_file() &&
          fnmatch(pattern.c_str(), entry.path().filename().c_str(), 0) == 0) {
        hits.push_back(entry.path());
      }
    }
    if (hits.empty()) throw IoError("no files match " + arg);
    std::sort(hits.begin(), hits.end());
    out.insert(out.end(), hits.begin(), hits.end());
  }
  return out;
}

WavData ReadInput(const fs::path& path, const CommonOptions& o) {
  try {
    return ReadWav(path, o.expect_rate);
  } catch (const WavError& e) {
    throw IoError(e.what());
  }
}

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

void WriteOutput(const fs::path& path, const std::vector<double>& samples, int rate) {
  std::size_t clipped = 0;
  try {
    clipped = WriteWav(path, samples, rate);
  } catch (const WavError& e) {
    throw IoError(e.what());
  }
  if (clipped > 0) spdlog::warn("{}: {} samples clipped", path.string(), clipped);
}

// Opens a text file for writing. fmt formats numbers independently of the
// global locale.
fmt::ostream OpenCsv(const fs::path& path) {
  try {
    return fmt::output_file(path.string());
  } catch (const std::system_error& e) {
    throw IoError("cannot write " + path.string() + ": " + e.what());
  }
}

double Median(std::vector<int> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const int upper = *mid;
  const int lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

std::vector<int> ToVector(const IntGrid& g) { return {g.data().begin(), g.data().end()}; }

std::string CounterSummary(const EnhancerCounters& c) {
  return fmt::format(
      "faults={} gamma_clamps={} variance_clamps={} mean_clamps={} regularizations={} "
      "psd_projections={} posterior_projections={} degenerate_products={} capped_rings={}",
      c.faults, c.gamma_clamps, c.variance_clamps, c.kalman.mean_clamps,
      c.kalman.regularizations, c.kalman.psd_projections, c.posterior_projections,
      c.degenerate_products, c.capped_rings);
}

constexpr const char* kCounterHeader =
    "faults,gamma_clamps,variance_clamps,mean_clamps,regularizations,psd_projections,"
    "posterior_projections,degenerate_products,capped_rings";

std::string CounterCsv(const EnhancerCounters& c) {
  return fmt::format("{},{},{},{},{},{},{},{},{}", c.faults, c.gamma_clamps, c.variance_clamps,
                     c.kalman.mean_clamps, c.kalman.regularizations, c.kalman.psd_projections,
                     c.posterior_projections, c.degenerate_products, c.capped_rings);
}

// Effective settings in the config-file format, so a run can be repeated.
void WriteSettings(const fs::path& path, const CommonOptions& o,
                   const std::vector<std::pair<std::string, std::string>>& extra) {
  auto out = OpenCsv(path);
  out.print("mode = {}\n", o.mode);
  if (o.speech_order) out.print("p = {}\n", *o.speech_order);
  if (o.noise_order) out.print("q = {}\n", *o.noise_order);
  out.print("frame-ms = {:.17g}\ninc-ms = {:.17g}\nmod-frame-ms = {:.17g}\n", o.frame_ms,
            o.inc_ms, o.mod_frame_ms);
  out.print("ring-cap = {}\nworkers = {}\n", o.ring_cap, o.workers);
  for (const auto& [k, v] : extra) out.print("{} = {}\n", k, v);
}

// ---------------------------------------------------------------- enhance

struct EnhanceArgs {
  CommonOptions common;
  std::vector<std::string> inputs;
};

void CmdEnhance(const EnhanceArgs& a) {
  const auto mode = ParseModeOrThrow(a.common.mode);
  MakeConfig(a.common, mode, 16000.0);  // reject bad settings before any I/O
  const auto inputs = ResolveInputs(a.inputs);
  const fs::path out_dir(a.common.out_dir);
  EnsureDir(out_dir);
  for (const auto& path : inputs) {
    const auto wav = ReadInput(path, a.common);
    const auto cfg = MakeConfig(a.common, mode, wav.sample_rate);
    spdlog::debug("{}: {} samples at {} Hz", path.string(), wav.samples.size(), wav.sample_rate);
    const auto result = Enhance(wav.samples, wav.sample_rate, cfg);
    const fs::path target = out_dir / (path.stem().string() + ".enhanced.wav");
    WriteOutput(target, result.samples, wav.sample_rate);
    fmt::print("{} -> {} [{}] {}\n", path.string(), target.string(), ModeName(mode),
               CounterSummary(result.counters));
  }
}

// ------------------------------------------------------------------ bench

struct BenchArgs {
  CommonOptions common;
  std::vector<std::string> clean;
  std::string noise;
  std::vector<double> snrs{-5.0, 0.0, 5.0};
  std::vector<std::string> modes{"logmmse", "mdkm", "mdkr"};
  std::uint64_t seed = 0;
  bool write_audio = false;
};

void CmdBench(const BenchArgs& a) {
  if (a.snrs.empty()) throw UsageError("empty --snr list");
  for (double s : a.snrs) {
    if (!std::isfinite(s)) throw UsageError("--snr values must be finite");
  }
  std::vector<EnhancerMode> modes;
  for (const auto& m : a.modes) modes.push_back(ParseModeOrThrow(m));
  for (auto m : modes) MakeConfig(a.common, m, 16000.0, false);

  const auto clean_paths = ResolveInputs(a.clean);
  std::optional<WavData> noise_file;
  if (!a.noise.empty()) noise_file = ReadInput(ResolveInputs({a.noise}).front(), a.common);

  const fs::path out_dir(a.common.out_dir);
  const fs::path diag_dir = out_dir / "diagnostics";
  EnsureDir(diag_dir);
  auto csv = OpenCsv(out_dir / "segsnr.csv");
  csv.print("file,snr_db,enhancer,mixture_snr_db,noisy_segsnr_db,enhanced_segsnr_db,"
            "improvement_db\n");
  auto counters = OpenCsv(diag_dir / "counters.csv");
  counters.print("file,snr_db,enhancer,seconds,{},median_speech_components,"
                 "median_noise_components\n",
                 kCounterHeader);

  std::mt19937_64 rng(a.seed);
  for (const auto& path : clean_paths) {
    const auto clean = ReadInput(path, a.common);
    std::vector<double> noise;
    std::size_t offset = 0;
    if (noise_file) {
      if (noise_file->sample_rate != clean.sample_rate) {
        throw IoError("noise and clean files differ in sample rate");
      }
      noise = noise_file->samples;
      if (noise.size() < clean.samples.size()) {
        spdlog::warn("noise ({} samples) is shorter than {} ({} samples); tiling", noise.size(),
                     path.string(), clean.samples.size());
      }
      offset = std::uniform_int_distribution<std::size_t>(0, noise.size() - 1)(rng);
    } else {
      noise.resize(clean.samples.size());
      std::normal_distribution<double> gauss;
      for (auto& v : noise) v = gauss(rng);
    }
    const std::string name = path.filename().string();
    for (double snr : a.snrs) {
      const auto mix = MixAtGlobalSnr(clean.samples, noise, snr, offset);
      const double mix_snr = GlobalSnrDb(clean.samples, mix.samples);
      const double noisy_seg = SegSnr(clean.samples, mix.samples).mean;
      for (auto mode : modes) {
        const auto cfg = MakeConfig(a.common, mode, clean.sample_rate, false);
        const auto start = std::chrono::steady_clock::now();
        const auto result = Enhance(mix.samples, clean.sample_rate, cfg);
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const double seg = SegSnr(clean.samples, result.samples).mean;
        csv.print("{},{:.17g},{},{:.17g},{:.17g},{:.17g},{:.17g}\n", name, snr, ModeName(mode),
                  mix_snr, noisy_seg, seg, seg - noisy_seg);
        counters.print("{},{:.17g},{},{:.6g},{},{:.17g},{:.17g}\n", name, snr, ModeName(mode),
                       seconds, CounterCsv(result.counters),
                       Median(ToVector(result.speech_components)),
                       Median(ToVector(result.noise_components)));
        spdlog::info("{} @ {:g} dB [{}]: segSNR {:.2f} -> {:.2f} dB", name, snr, ModeName(mode),
                     noisy_seg, seg);
        if (a.write_audio) {
          WriteOutput(out_dir / fmt::format("{}.snr{:g}.{}.wav", path.stem().string(), snr,
                                            ModeName(mode)),
                      result.samples, clean.sample_rate);
        }
      }
    }
  }
  std::vector<std::string> snr_text;
  for (double s : a.snrs) snr_text.push_back(fmt::format("{:.17g}", s));
  WriteSettings(diag_dir / "settings.txt", a.common,
                {{"snr", fmt::format("{}", fmt::join(snr_text, ","))},
                 {"modes", fmt::format("{}", fmt::join(a.modes, ","))},
                 {"seed", std::to_string(a.seed)},
                 {"noise", a.noise.empty() ? "(seeded white noise)" : a.noise}});
}

// --------------------------------------------------------------- diagnose

struct DiagnoseArgs {
  CommonOptions common;
  std::string input;
};

void CmdDiagnose(const DiagnoseArgs& a) {
  const auto mode = ParseModeOrThrow(a.common.mode);
  MakeConfig(a.common, mode, 16000.0);
  const auto path = ResolveInputs({a.input}).front();
  const auto wav = ReadInput(path, a.common);
  const auto cfg = MakeConfig(a.common, mode, wav.sample_rate);
  const auto d = Diagnose(wav.samples, wav.sample_rate, cfg);

  const fs::path out_dir(a.common.out_dir);
  EnsureDir(out_dir);
  const std::string stem = path.stem().string();

  auto bins = OpenCsv(out_dir / (stem + ".bins.csv"));
  bins.print("bin,frequency_hz,mean_noise_psd,speech_prediction_gain_db,"
             "noise_prediction_gain_db\n");
  const auto& psd = d.noise.psd;
  for (std::size_t k = 0; k < psd.cols(); ++k) {
    double mean = 0.0;
    for (std::size_t n = 0; n < psd.rows(); ++n) mean += psd(n, k);
    mean /= static_cast<double>(std::max<std::size_t>(psd.rows(), 1));
    const double freq = static_cast<double>(k) * wav.sample_rate / cfg.frame.frame_len;
    bins.print("{},{:.17g},{:.17g},{:.17g},{:.17g}\n", k, freq, mean,
               d.speech_prediction_gain[k], d.noise_prediction_gain[k]);
  }

  if (!d.result.speech_components.empty()) {
    auto comp = OpenCsv(out_dir / (stem + ".components.csv"));
    comp.print("frame,bin,speech_components,noise_components\n");
    const auto& s = d.result.speech_components;
    const auto& w = d.result.noise_components;
    for (std::size_t n = 0; n < s.rows(); ++n) {
      for (std::size_t k = 0; k < s.cols(); ++k) {
        comp.print("{},{},{},{}\n", n, k, s(n, k), w(n, k));
      }
    }
  }

  auto summary = OpenCsv(out_dir / (stem + ".summary.csv"));
  std::size_t noise_frames = 0;
  for (auto flag : d.noise.noise_only) noise_frames += flag;
  summary.print("enhancer,frames,noise_only_frames,{},median_speech_components,"
                "median_noise_components\n",
                kCounterHeader);
  summary.print("{},{},{},{},{:.17g},{:.17g}\n", ModeName(mode), d.result.amplitudes.rows(),
                noise_frames, CounterCsv(d.result.counters),
                Median(ToVector(d.result.speech_components)),
                Median(ToVector(d.result.noise_components)));
  WriteOutput(out_dir / (stem + ".enhanced.wav"), d.result.samples, wav.sample_rate);
  fmt::print("{} [{}] {}\n", path.string(), ModeName(mode), CounterSummary(d.result.counters));
}

}  // namespace

int Run(int argc, const char* const* argv) {
  SetUpLogging();
  CLI::App app{"Modulation-domain Kalman speech enhancement"};
  app.require_subcommand(1);

  EnhanceArgs enhance;
  auto* enhance_cmd = app.add_subcommand("enhance", "Enhance WAV files");
  AddCommonOptions(*enhance_cmd, enhance.common, true);
  enhance_cmd->add_option("inputs", enhance.inputs, "Input WAV files or wildcard patterns")
      ->required();

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand(
      "bench", "Mix noise into clean files at given global SNRs and score each enhancer");
  AddCommonOptions(*bench_cmd, bench.common, false);
  bench_cmd->add_option("--clean", bench.clean, "Clean reference WAV files")->required();
  bench_cmd->add_option("--noise", bench.noise,
                        "Noise WAV (tiled when short); seeded white noise if omitted");
  bench_cmd->add_option("--snr", bench.snrs, "Global SNRs in dB")
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("--modes", bench.modes, "Enhancers to run (--q applies to mdkr)")
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed, "Seed for the noise offset or white noise")
      ->capture_default_str();
  bench_cmd->add_flag("--write-audio", bench.write_audio, "Also write the enhanced signals");

  DiagnoseArgs diagnose;
  auto* diagnose_cmd =
      app.add_subcommand("diagnose", "Per-bin prediction gains and ring sizes for one file");
  AddCommonOptions(*diagnose_cmd, diagnose.common, true);
  diagnose_cmd->add_option("input", diagnose.input, "Input WAV file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (enhance_cmd->parsed()) {
      if (!enhance.common.config_path.empty()) {
        ApplyConfigFile(*enhance_cmd, enhance.common.config_path);
      }
      CmdEnhance(enhance);
    } else if (bench_cmd->parsed()) {
      if (!bench.common.config_path.empty()) ApplyConfigFile(*bench_cmd, bench.common.config_path);
      CmdBench(bench);
    } else {
      if (!diagnose.common.config_path.empty()) {
        ApplyConfigFile(*diagnose_cmd, diagnose.common.config_path);
      }
      CmdDiagnose(diagnose);
    }
  } catch (const UsageError& e) {
    spdlog::error("{}", e.what());
    fmt::print(stderr, "Run with --help for usage.\n");
    return kExitUsage;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace modkalm::cli
