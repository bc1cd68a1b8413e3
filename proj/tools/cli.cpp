#include "cli.hpp"

#include "mwcnn/binary_io.hpp"
#include "mwcnn/checkpoint.hpp"
#include "mwcnn/dataset.hpp"
#include "mwcnn/equivalence.hpp"
#include "mwcnn/image_io.hpp"
#include "mwcnn/metrics.hpp"
#include "mwcnn/training.hpp"
#include "mwcnn/verify.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

namespace mwcnn::cli {
namespace fs = std::filesystem;

namespace {

constexpr std::array<char, 8> kDumpMagic{'M', 'W', 'D', 'W', 'T', 'R', 'A', 'W'};
constexpr std::uint32_t kDumpVersion = 1;
constexpr std::array<const char*, 4> kBandNames{"LL", "LH", "HL", "HH"};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

int round_up(int v, int multiple) { return (v + multiple - 1) / multiple * multiple; }

std::vector<ImageRecord> load_inputs(const fs::path& path) {
  if (fs::is_directory(path)) return ingest_dataset(path).images;
  if (!fs::exists(path)) throw UsageError("input not found: " + path.string());
  return {load_image(path)};
}

std::vector<FeatureMap> pixels_of(const std::vector<ImageRecord>& records) {
  std::vector<FeatureMap> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.pixels);
  return out;
}

/// Largest top-left crop whose sides are multiples of `multiple`.
FeatureMap crop_to_multiple(const FeatureMap& x, int multiple) {
  const int h = x.height() / multiple * multiple;
  const int w = x.width() / multiple * multiple;
  if (h == 0 || w == 0) {
    throw UsageError("image " + x.shape().str() + " is smaller than " + std::to_string(multiple) + " pixels");
  }
  return crop(x, 0, 0, h, w);
}

std::string leaf_label(int index, int levels) {
  std::string label;
  for (int l = levels - 1; l >= 0; --l) {
    if (!label.empty()) label += '-';
    label += kBandNames[static_cast<std::size_t>((index >> (2 * l)) & 3)];
  }
  return label;
}

std::uint32_t wavelet_code(WaveletKind k) { return k == WaveletKind::haar ? 0u : 1u; }

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << std::fixed << v;
  return s.str();
}

template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(thread_limit()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

FeatureMap reflect_pad(const FeatureMap& x, int multiple) {
  const int h = round_up(x.height(), multiple);
  const int w = round_up(x.width(), multiple);
  if (h == x.height() && w == x.width()) return x;
  FeatureMap out(Shape{x.batch(), x.channels(), h, w});
  for (int n = 0; n < x.batch(); ++n)
    for (int c = 0; c < x.channels(); ++c)
      for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < w; ++xx)
          out.at(n, c, y, xx) = x.at(n, c, reflect_index(y, x.height()), reflect_index(xx, x.width()));
  return out;
}

int thread_limit() {
  const char* env = std::getenv("MWCNN_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) return 1;
  return static_cast<int>(std::min<long>(v, 256));
}

// ---------------------------------------------------------------- train

int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err) {
  if (o.data.empty()) throw UsageError("train: --data is required");
  NetworkConfig net_cfg = NetworkConfig::scaled(o.levels, o.block_depth, o.width);
  net_cfg.skip = parse_skip_mode(o.skip);
  net_cfg.wavelet = parse_wavelet(o.wavelet);
  if (!o.expand_wavelet.empty()) net_cfg.expand_wavelet = parse_wavelet(o.expand_wavelet);
  net_cfg.normalization = o.orthonormal ? Normalization::orthonormal : Normalization::paper;
  net_cfg.validate();

  TrainConfig cfg;
  cfg.lr_start = o.lr_start;
  cfg.lr_end = o.lr_end;
  cfg.epochs = o.epochs;
  cfg.batch = o.batch;
  cfg.patch_size = o.patch;
  cfg.patches = o.patches;
  cfg.sigma = o.sigma;
  cfg.augment = !o.no_augment;
  cfg.seed = o.seed;
  cfg.checkpoint = o.out;
  cfg.validate();
  if (o.patch % (1 << o.levels) != 0) {
    throw UsageError("train: patch size " + std::to_string(o.patch) + " is not divisible by 2^" +
                     std::to_string(o.levels));
  }

  const Dataset data = ingest_dataset(o.data);
  std::vector<FeatureMap> images = pixels_of(data.images);
  std::vector<FeatureMap> eval;
  if (!o.eval.empty()) {
    for (const auto& img : pixels_of(load_inputs(o.eval))) eval.push_back(crop_to_multiple(img, 1 << o.levels));
  }

  Network net(net_cfg);
  Rng init_rng(o.seed ^ 0x5EEDull);
  net.init_he(init_rng);

  fs::path loss_path = o.loss_csv;
  if (loss_path.empty()) loss_path = fs::path(o.out.string() + ".loss.csv");
  std::vector<EpochRecord> curve;
  auto flush_curve = [&] {
    std::ofstream csv(loss_path);
    write_loss_csv(csv, curve);
  };

  err << "train: " << images.size() << " images, " << net.parameter_count() << " parameters, "
      << cfg.steps_per_epoch() << " steps per epoch\n";
  try {
    train(net, images, cfg, eval, [&](const EpochRecord& r) {
      curve.push_back(r);
      flush_curve();
      err << "epoch " << r.epoch << " lr " << r.lr << " loss " << r.train_loss;
      if (!std::isnan(r.eval_psnr)) err << " eval_psnr " << fmt(r.eval_psnr);
      err << '\n';
    });
  } catch (const TrainingDiverged& e) {
    flush_curve();
    err << "train: " << e.what() << "; last good checkpoint: "
        << (e.last_good_checkpoint ? e.last_good_checkpoint->string() : std::string("none")) << '\n';
    return 3;
  }
  out << "checkpoint," << o.out.string() << '\n' << "loss_csv," << loss_path.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------- denoise

int cmd_denoise(const DenoiseOptions& o, std::ostream& out, std::ostream& err) {
  if (o.model.empty() || o.input.empty()) throw UsageError("denoise: --model and --input are required");
  if (!fs::exists(o.model)) throw UsageError("denoise: checkpoint not found: " + o.model.string());
  const Network net = load_checkpoint(o.model).network;

  const bool input_is_dir = fs::is_directory(o.input);
  const std::vector<ImageRecord> inputs = load_inputs(o.input);

  std::map<std::string, FeatureMap> gt;
  if (!o.gt.empty()) {
    for (auto& r : load_inputs(o.gt)) gt.emplace(r.id, r.pixels);
  }
  const bool report = o.sigma.has_value() || !gt.empty();

  fs::path out_dir;
  fs::path out_file;
  if (input_is_dir) {
    out_dir = o.output.empty() ? fs::path(o.input.string() + "_denoised") : o.output;
    fs::create_directories(out_dir);
  } else if (o.output.empty()) {
    out_file = o.input.parent_path() / (o.input.stem().string() + "_denoised" + o.input.extension().string());
  } else if (fs::is_directory(o.output)) {
    out_file = o.output / o.input.filename();
  } else {
    out_file = o.output;
  }

  struct Row {
    double psnr_noisy = 0.0, psnr_restored = 0.0, ssim_restored = 0.0;
    bool scored = false;
  };
  std::vector<Row> rows(inputs.size());
  const int multiple = net.size_multiple();

  parallel_for(inputs.size(), [&](std::size_t i) {
    const ImageRecord& rec = inputs[i];
    FeatureMap noisy = rec.pixels;
    const FeatureMap* clean = nullptr;
    if (o.sigma) {
      Rng rng(o.seed + i);
      noisy = degrade_gaussian(rec.pixels, *o.sigma, rng);
      clean = &rec.pixels;
    } else if (auto it = gt.find(rec.id); it != gt.end()) {
      clean = &it->second;
    }
    const FeatureMap padded = reflect_pad(noisy, multiple);
    const FeatureMap restored = crop(denoise_image(net, padded), 0, 0, noisy.height(), noisy.width());
    save_image(restored, input_is_dir ? out_dir / fs::path(rec.id + ".png") : out_file);
    if (clean) {
      if (clean->shape() != noisy.shape()) throw UsageError("denoise: ground truth size differs for " + rec.id);
      Row& r = rows[i];
      r.psnr_noisy = psnr(noisy, *clean);
      r.psnr_restored = psnr(restored, *clean);
      r.ssim_restored = std::min(clean->height(), clean->width()) >= 11 ? ssim(restored, *clean)
                                                                        : std::numeric_limits<double>::quiet_NaN();
      r.scored = true;
    }
  });

  if (report) {
    out << "id,psnr_noisy,psnr_restored,ssim_restored\n";
    Row mean;
    int scored = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const Row& r = rows[i];
      if (!r.scored) {
        err << "denoise: no ground truth for " << inputs[i].id << '\n';
        continue;
      }
      out << inputs[i].id << ',' << fmt(r.psnr_noisy) << ',' << fmt(r.psnr_restored) << ','
          << fmt(r.ssim_restored) << '\n';
      mean.psnr_noisy += r.psnr_noisy;
      mean.psnr_restored += r.psnr_restored;
      mean.ssim_restored += r.ssim_restored;
      ++scored;
    }
    if (scored > 0) {
      out << "mean," << fmt(mean.psnr_noisy / scored) << ',' << fmt(mean.psnr_restored / scored) << ','
          << fmt(mean.ssim_restored / scored) << '\n';
    }
  } else {
    out << "written," << (input_is_dir ? out_dir : out_file).string() << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- dwt

FeatureMap subband_view(const FeatureMap& band) {
  double peak = 0.0;
  for (double v : band.data()) peak = std::max(peak, std::abs(v));
  FeatureMap view(band.shape(), 128.0);
  if (peak == 0.0) return view;
  const double s = peak / 127.0;
  std::transform(band.data().begin(), band.data().end(), view.data().begin(),
                 [s](double v) { return std::clamp(128.0 + v / s, 0.0, 255.0); });
  return view;
}

void write_subband_dump(const fs::path& path, const SubbandDump& dump) {
  if (dump.leaves.empty()) throw std::invalid_argument("subband dump: no leaves");
  const Shape leaf = dump.leaves.front().shape();
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  f.write(kDumpMagic.data(), kDumpMagic.size());
  using binary::put;
  put<std::uint32_t>(f, kDumpVersion);
  put<std::uint32_t>(f, static_cast<std::uint32_t>(dump.levels));
  put<std::uint32_t>(f, wavelet_code(dump.wavelet));
  put<std::uint32_t>(f, dump.normalization == Normalization::paper ? 0u : 1u);
  put<std::uint32_t>(f, static_cast<std::uint32_t>(dump.source_height));
  put<std::uint32_t>(f, static_cast<std::uint32_t>(dump.source_width));
  put<std::uint32_t>(f, static_cast<std::uint32_t>(dump.leaves.size()));
  put<std::uint32_t>(f, static_cast<std::uint32_t>(leaf.h));
  put<std::uint32_t>(f, static_cast<std::uint32_t>(leaf.w));
  for (const auto& l : dump.leaves) {
    if (l.shape() != leaf) throw std::invalid_argument("subband dump: leaves differ in shape");
    for (double v : l.data()) binary::put_f64(f, v);
  }
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

SubbandDump read_subband_dump(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::array<char, 8> magic{};
  if (!f.read(magic.data(), magic.size()) || magic != kDumpMagic) {
    throw binary::FormatError(path.string() + ": not a subband dump");
  }
  using binary::get;
  if (get<std::uint32_t>(f) != kDumpVersion) throw binary::FormatError(path.string() + ": unsupported version");
  SubbandDump d;
  d.levels = static_cast<int>(get<std::uint32_t>(f));
  d.wavelet = get<std::uint32_t>(f) == 0 ? WaveletKind::haar : WaveletKind::db2;
  d.normalization = get<std::uint32_t>(f) == 0 ? Normalization::paper : Normalization::orthonormal;
  d.source_height = static_cast<int>(get<std::uint32_t>(f));
  d.source_width = static_cast<int>(get<std::uint32_t>(f));
  const auto count = get<std::uint32_t>(f);
  const int h = static_cast<int>(get<std::uint32_t>(f));
  const int w = static_cast<int>(get<std::uint32_t>(f));
  if (d.levels < 1 || d.levels > 8 || count != (1u << (2 * d.levels))) {
    throw binary::FormatError(path.string() + ": inconsistent leaf count");
  }
  d.leaves.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    FeatureMap leaf(Shape{1, 1, h, w});
    binary::get_f64s(f, leaf.data());
    d.leaves.push_back(std::move(leaf));
  }
  return d;
}

FeatureMap reconstruct_dump(const SubbandDump& dump) {
  const WaveletSpec spec = WaveletSpec::make(dump.wavelet, dump.normalization);
  const FeatureMap full = wpt_reconstruct(dump.leaves, spec, dump.levels);
  return crop(full, 0, 0, dump.source_height, dump.source_width);
}

int cmd_dwt(const DwtOptions& o, std::ostream& out, std::ostream&) {
  if (!o.inverse.empty()) {
    if (o.output.empty()) throw UsageError("dwt: --inverse needs --output");
    save_image(reconstruct_dump(read_subband_dump(o.inverse)), o.output);
    out << "written," << o.output.string() << '\n';
    return 0;
  }
  if (o.input.empty()) throw UsageError("dwt: --input is required");
  if (o.levels < 1 || o.levels > 6) throw UsageError("dwt: --levels must be in 1..6");
  const WaveletSpec spec =
      WaveletSpec::make(parse_wavelet(o.wavelet), o.orthonormal ? Normalization::orthonormal : Normalization::paper);
  const ImageRecord rec = load_image(o.input);
  const FeatureMap padded = reflect_pad(rec.pixels, 1 << o.levels);
  const int coarsest = std::min(padded.height(), padded.width()) >> (o.levels - 1);
  if (coarsest < spec.min_extent()) {
    throw UsageError("dwt: image too small for " + std::to_string(o.levels) + " levels of " + spec.name());
  }

  SubbandDump dump;
  dump.levels = o.levels;
  dump.wavelet = spec.kind;
  dump.normalization = spec.normalization;
  dump.source_height = rec.pixels.height();
  dump.source_width = rec.pixels.width();
  dump.leaves = wpt_decompose(padded, spec, o.levels);

  fs::create_directories(o.out);
  const std::string stem = o.input.stem().string();
  out << "tile,file,height,width,max_abs\n";
  for (std::size_t i = 0; i < dump.leaves.size(); ++i) {
    const FeatureMap& leaf = dump.leaves[i];
    const std::string label = leaf_label(static_cast<int>(i), o.levels);
    const fs::path file = o.out / (stem + "_" + label + ".pgm");
    save_image(subband_view(leaf), file);
    double peak = 0.0;
    for (double v : leaf.data()) peak = std::max(peak, std::abs(v));
    out << label << ',' << file.string() << ',' << leaf.height() << ',' << leaf.width() << ','
        << std::setprecision(17) << peak << '\n';
  }
  const fs::path raw = o.out / (stem + ".mwdwt");
  write_subband_dump(raw, dump);
  out << "raw," << raw.string() << ",,,\n";
  return 0;
}

// ---------------------------------------------------------------- verify

int cmd_verify(const VerifyCliOptions& o, std::ostream& out, std::ostream&) {
  VerifyOptions v;
  v.seed = o.seed;
  v.trials = o.trials;
  v.corrupt_haar_tap = o.corrupt_haar_tap;
  const auto checks = run_verification(v);
  print_checks(out, checks);
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; }) ? 0 : 1;
}

// ---------------------------------------------------------------- gridding

int cmd_gridding(const GriddingOptions& o, std::ostream& out, std::ostream&) {
  if (o.depth < 1 || o.depth > 8) throw UsageError("gridding: --depth must be in 1..8");
  out << "depth,dilated_positions,dilated_adjacent,wavelet_positions,wavelet_dense,"
         "dilated_neighbor_overlap,wavelet_neighbor_overlap\n";
  for (int d = 1; d <= o.depth; ++d) {
    const auto r = equivalence::gridding_report(d);
    out << d << ',' << r.dilated.count() << ',' << (r.dilated.has_adjacent_pair() ? "yes" : "no") << ','
        << r.wavelet.count() << ',' << (r.wavelet.dense() ? "yes" : "no") << ',' << r.dilated_neighbor_overlap
        << ',' << r.wavelet_neighbor_overlap << '\n';
  }
  if (!o.pgm_prefix.empty()) {
    const auto r = equivalence::gridding_report(o.depth);
    auto write = [&](const equivalence::Footprint& fp, const std::string& suffix) {
      const int h = fp.max_row() - fp.min_row() + 1;
      const int w = fp.max_col() - fp.min_col() + 1;
      FeatureMap img(Shape{1, 1, h, w}, 0.0);
      for (const auto& [y, x] : fp.positions) img.at(0, 0, y - fp.min_row(), x - fp.min_col()) = 255.0;
      save_image(img, fs::path(o.pgm_prefix.string() + suffix));
    };
    write(r.dilated, "_dilated.pgm");
    write(r.wavelet, "_wavelet.pgm");
  }
  return 0;
}

// ---------------------------------------------------------------- synth

int cmd_synth(const SynthOptions& o, std::ostream& out, std::ostream&) {
  if (o.out.empty()) throw UsageError("synth: --out is required");
  if (o.count < 1 || o.height < 8 || o.width < 8) throw UsageError("synth: need count ≥ 1 and sides ≥ 8");
  fs::create_directories(o.out);
  for (int i = 0; i < o.count; ++i) {
    std::ostringstream name;
    name << "synth_" << std::setw(3) << std::setfill('0') << i << ".pgm";
    const fs::path file = o.out / name.str();
    save_image(synthetic_image(o.height, o.width, o.seed + static_cast<std::uint64_t>(i)), file);
    out << file.string() << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- parsing

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-level wavelet CNN toolkit: train, denoise, transform and verify"};
  app.require_subcommand(1);

  TrainOptions train_o;
  auto* train_cmd = app.add_subcommand("train", "Train a residual denoiser on a directory of images");
  train_cmd->add_option("--data", train_o.data, "Directory of grayscale PGM/PNG images")->required();
  train_cmd->add_option("--sigma", train_o.sigma, "Noise standard deviation on the 0-255 scale")->required();
  train_cmd->add_option("--levels", train_o.levels, "Wavelet levels (0 = plain CNN)");
  train_cmd->add_option("--width", train_o.width, "Base feature width");
  train_cmd->add_option("--block-depth", train_o.block_depth, "Convolutions per block");
  train_cmd->add_option("--epochs", train_o.epochs);
  train_cmd->add_option("--batch", train_o.batch);
  train_cmd->add_option("--patch", train_o.patch, "Patch side length");
  train_cmd->add_option("--patches", train_o.patches, "Size of the patch pool");
  train_cmd->add_option("--lr-start", train_o.lr_start);
  train_cmd->add_option("--lr-end", train_o.lr_end);
  train_cmd->add_option("--seed", train_o.seed);
  train_cmd->add_option("--skip", train_o.skip, "sum, concat or none");
  train_cmd->add_option("--wavelet", train_o.wavelet, "haar or db2");
  train_cmd->add_option("--expand-wavelet", train_o.expand_wavelet, "Wavelet of the expanding path");
  train_cmd->add_flag("--orthonormal", train_o.orthonormal, "Use unit-energy wavelet filters");
  train_cmd->add_flag("--no-augment", train_o.no_augment, "Disable dihedral augmentation");
  train_cmd->add_option("--out", train_o.out, "Checkpoint path");
  train_cmd->add_option("--loss-csv", train_o.loss_csv, "Loss curve path (default <out>.loss.csv)");
  train_cmd->add_option("--eval", train_o.eval, "Held-out images scored after every epoch");

  DenoiseOptions den_o;
  double den_sigma = 0.0;
  auto* den_cmd = app.add_subcommand("denoise", "Restore noisy images with a trained checkpoint");
  den_cmd->add_option("--model", den_o.model, "Checkpoint file")->required();
  den_cmd->add_option("--input", den_o.input, "Image file or directory")->required();
  den_cmd->add_option("--gt", den_o.gt, "Ground-truth image file or directory");
  auto* sigma_opt =
      den_cmd->add_option("--sigma", den_sigma, "Treat input as clean and add noise of this std first");
  den_cmd->add_option("--seed", den_o.seed);
  den_cmd->add_option("--output", den_o.output, "Output file or directory");

  DwtOptions dwt_o;
  auto* dwt_cmd = app.add_subcommand("dwt", "Wavelet packet decomposition into viewable tiles");
  dwt_cmd->add_option("--input", dwt_o.input, "Image file");
  dwt_cmd->add_option("--levels", dwt_o.levels);
  dwt_cmd->add_option("--wavelet", dwt_o.wavelet, "haar or db2");
  dwt_cmd->add_flag("--orthonormal", dwt_o.orthonormal);
  dwt_cmd->add_option("--out", dwt_o.out, "Output directory");
  dwt_cmd->add_option("--inverse", dwt_o.inverse, "Reconstruct from a raw dump");
  dwt_cmd->add_option("--output", dwt_o.output, "Image written by --inverse");

  VerifyCliOptions ver_o;
  auto* ver_cmd = app.add_subcommand("verify", "Run the numerical self-checks");
  ver_cmd->add_option("--seed", ver_o.seed);
  ver_cmd->add_option("--trials", ver_o.trials);
  ver_cmd->add_flag("--corrupt-haar-tap", ver_o.corrupt_haar_tap)->group("");

  GriddingOptions grid_o;
  auto* grid_cmd = app.add_subcommand("gridding", "Receptive-field footprints of dilated vs wavelet stacks");
  grid_cmd->add_option("--depth", grid_o.depth);
  grid_cmd->add_option("--pgm", grid_o.pgm_prefix, "Write footprint images with this path prefix");

  SynthOptions syn_o;
  auto* syn_cmd = app.add_subcommand("synth", "Write deterministic synthetic grayscale images");
  syn_cmd->add_option("--out", syn_o.out)->required();
  syn_cmd->add_option("--count", syn_o.count);
  syn_cmd->add_option("--height", syn_o.height);
  syn_cmd->add_option("--width", syn_o.width);
  syn_cmd->add_option("--seed", syn_o.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*train_cmd) return cmd_train(train_o, out, err);
    if (*den_cmd) {
      if (sigma_opt->count() > 0) den_o.sigma = den_sigma;
      return cmd_denoise(den_o, out, err);
    }
    if (*dwt_cmd) return cmd_dwt(dwt_o, out, err);
    if (*ver_cmd) return cmd_verify(ver_o, out, err);
    if (*grid_cmd) return cmd_gridding(grid_o, out, err);
    if (*syn_cmd) return cmd_synth(syn_o, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace mwcnn::cli
