// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0
//
// nervkit command-line interface: training, compression, evaluation,
// rate-distortion and bench reports, hyper-network encoding, and head-layer
// dissection. Every command records a manifest next to its main output.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "nervkit/codec.hpp"
#include "nervkit/config_io.hpp"
#include "nervkit/image_io.hpp"
#include "nervkit/metrics.hpp"
#include "nervkit/presets.hpp"
#include "nervkit/synthetic.hpp"
#include "nervkit/trainer.hpp"
#include "nervkit/xinc.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace nervkit;

namespace {

// ---------------------------------------------------------------------------
// shared helpers

struct OutputPolicy {
    bool force = false;
    void check(const std::string& path) const {
        if (!force && fs::exists(path))
            throw DataError("output exists: " + path + " (pass --force to overwrite)");
    }
};

class ManifestBuilder {
public:
    ManifestBuilder(std::string command, std::uint64_t seed) {
        j_["command"] = std::move(command);
        j_["seed"] = seed;
        j_["device"] = {{"kind", "cpu"}, {"threads", 1}};
        j_["artifacts"] = json::array();
        j_["inputs"] = json::object();
    }
    void input(const std::string& label, const std::string& path) {
        j_["inputs"][label] = {{"path", path}, {"sha256", sha256_file(path)}};
    }
    void input_dir(const std::string& label, const std::string& path) {
        // Digest of the sorted file list + per-file digests.
        std::vector<std::string> files;
        for (const auto& e : fs::directory_iterator(path))
            if (e.is_regular_file()) files.push_back(e.path().string());
        std::sort(files.begin(), files.end());
        std::string acc;
        for (const std::string& f : files) acc += f + ":" + sha256_file(f) + "\n";
        j_["inputs"][label] = {{"path", path}, {"sha256", sha256_hex(acc)}, {"files", files.size()}};
    }
    void artifact(const std::string& path) { j_["artifacts"].push_back(path); }
    json& data() { return j_; }
    void write(const std::string& main_output) {
        std::string path = main_output + ".manifest.json";
        std::ofstream f(path);
        if (!f) throw DataError("cannot write manifest: " + path);
        f << j_.dump(2) << "\n";
    }

private:
    json j_;
};

ModelConfig load_config_arg(const std::string& spec, int grid_frames) {
    // Either a JSON file path or a preset name ("rnerv-small@64x128").
    if (fs::exists(spec)) return load_model_config(spec);
    std::string name = spec;
    std::array<std::int64_t, 2> res = {1080, 1920};
    auto at = spec.find('@');
    if (at != std::string::npos) {
        name = spec.substr(0, at);
        std::string r = spec.substr(at + 1);
        auto x = r.find('x');
        if (x == std::string::npos) throw ConfigError("preset resolution must look like 64x128");
        res = {std::stoll(r.substr(0, x)), std::stoll(r.substr(x + 1))};
    }
    for (const std::string& p : preset_model_names())
        if (p == name) return preset_model_config(name, res, grid_frames > 0 ? grid_frames : 8);
    throw ConfigError("'" + spec + "' is neither a config file nor a preset (" +
                      [] {
                          std::string s;
                          for (const auto& n : preset_model_names()) s += (s.empty() ? "" : ", ") + n;
                          return s;
                      }() +
                      ")");
}

std::pair<std::int64_t, std::int64_t> parse_frame_range(const std::string& range) {
    auto dots = range.find("..");
    if (dots == std::string::npos) {
        std::int64_t v = std::stoll(range);
        return {v, v};
    }
    return {std::stoll(range.substr(0, dots)), std::stoll(range.substr(dots + 2))};
}

TrainBudget parse_budget(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos)
        throw ConfigError("budget must look like epochs:300, seconds:120 or flops:1e12");
    std::string kind = text.substr(0, colon);
    double amount = std::stod(text.substr(colon + 1));
    if (kind == "epochs") return TrainBudget::epochs(amount);
    if (kind == "seconds") return TrainBudget::wall_seconds(amount);
    if (kind == "flops") return TrainBudget::flops(amount);
    throw ConfigError("unknown budget kind '" + kind + "'");
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write csv: " + path);
    for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
    f << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
        f << "\n";
    }
}

struct PlotSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

/// Minimal standalone SVG scatter/line plot so reports need no plotting
/// toolchain.
void write_svg_plot(const std::string& path, const std::vector<PlotSeries>& series, const std::string& xlabel,
                    const std::string& ylabel, const std::string& title) {
    const double W = 640, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (auto [x, y] : s.points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (xmin > xmax) {
        xmin = 0;
        xmax = 1;
        ymin = 0;
        ymax = 1;
    }
    if (xmax - xmin < 1e-12) xmax = xmin + 1;
    if (ymax - ymin < 1e-12) ymax = ymin + 1;
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    std::ofstream f(path);
    if (!f) throw DataError("cannot write plot: " + path);
    f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    f << "<rect width='100%' height='100%' fill='white'/>\n";
    f << "<text x='" << W / 2 << "' y='20' text-anchor='middle' font-size='16'>" << title << "</text>\n";
    f << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr << "' y2='" << H - mb
      << "' stroke='black'/>\n";
    f << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << H - mb << "' stroke='black'/>\n";
    for (int i = 0; i <= 4; ++i) {
        double x = xmin + (xmax - xmin) * i / 4.0;
        double y = ymin + (ymax - ymin) * i / 4.0;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4g", x);
        f << "<text x='" << px(x) << "' y='" << H - mb + 18 << "' text-anchor='middle' font-size='11'>" << buf
          << "</text>\n";
        std::snprintf(buf, sizeof(buf), "%.4g", y);
        f << "<text x='" << ml - 8 << "' y='" << py(y) + 4 << "' text-anchor='end' font-size='11'>" << buf
          << "</text>\n";
    }
    f << "<text x='" << (ml + W - mr) / 2 << "' y='" << H - 12 << "' text-anchor='middle' font-size='13'>" << xlabel
      << "</text>\n";
    f << "<text x='16' y='" << (mt + H - mb) / 2 << "' text-anchor='middle' font-size='13' transform='rotate(-90 16 "
      << (mt + H - mb) / 2 << ")'>" << ylabel << "</text>\n";
    int ci = 0;
    for (const auto& s : series) {
        const char* color = colors[ci % 6];
        f << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
        for (auto [x, y] : s.points) f << px(x) << "," << py(y) << " ";
        f << "'/>\n";
        for (auto [x, y] : s.points)
            f << "<circle cx='" << px(x) << "' cy='" << py(y) << "' r='3' fill='" << color << "'/>\n";
        f << "<text x='" << W - mr - 6 << "' y='" << mt + 16 * ci << "' text-anchor='end' font-size='12' fill='"
          << color << "'>" << s.label << "</text>\n";
        ++ci;
    }
    f << "</svg>\n";
}

std::vector<VideoTensor> cut_clips(const std::vector<std::string>& frame_dirs, int clip_frames) {
    std::vector<VideoTensor> clips;
    for (const std::string& dir : frame_dirs) {
        VideoTensor video = ingest_frames(dir);
        std::int64_t groups = video.num_frames() / clip_frames;
        for (std::int64_t g = 0; g < groups; ++g) {
            VideoTensor clip;
            clip.frames = Tensor({clip_frames, video.height(), video.width(), 3});
            clip.frame_rate = video.frame_rate;
            clip.name = video.name + "-clip" + std::to_string(g);
            for (int f = 0; f < clip_frames; ++f) clip.set_frame_chw(f, video.frame_chw(g * clip_frames + f));
            clips.push_back(std::move(clip));
        }
    }
    if (clips.empty()) throw DataError("no whole clips could be cut from the given frame directories");
    return clips;
}

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

struct CommonArgs {
    std::uint64_t seed = 0;
    bool force = false;
};

// ---------------------------------------------------------------------------
// subcommand implementations

int cmd_train(const std::string& config_spec, const std::string& frames_dir, const std::string& out,
              const std::string& budget_text, double peak_lr, int batch_frames, const std::string& loss_name,
              double alpha, int grid_frames, const CommonArgs& common) {
    OutputPolicy policy{common.force};
    policy.check(out);
    VideoTensor video = ingest_frames(frames_dir);
    int gf = grid_frames > 0 ? grid_frames : std::max<int>(2, static_cast<int>(video.num_frames() / 4));
    ModelConfig config = load_config_arg(config_spec, gf);
    if (config.target_resolution[0] != video.height() || config.target_resolution[1] != video.width())
        throw ConfigError("config resolution " + std::to_string(config.target_resolution[0]) + "x" +
                          std::to_string(config.target_resolution[1]) + " does not match the frames (" +
                          std::to_string(video.height()) + "x" + std::to_string(video.width()) + ")");
    TrainBudget budget = parse_budget(budget_text);
    OptimSpec optim;
    optim.peak_lr = peak_lr;
    optim.batch_frames = batch_frames;
    if (loss_name == "l1_ssim") {
        optim.loss.kind = LossSpec::Kind::l1_ssim;
        optim.loss.alpha = alpha;
    } else if (loss_name != "mse") {
        throw ConfigError("unknown loss '" + loss_name + "' (mse | l1_ssim)");
    }

    Model model(config, common.seed);
    std::string hash = config_hash(config);
    std::cout << config.name << ": " << count_params(config) << " params, "
              << fmt(static_cast<double>(estimate_flops(config)), "%.3g") << " FLOPs/frame\n";

    ManifestBuilder manifest("train", common.seed);
    manifest.input_dir("frames", frames_dir);
    manifest.data()["config"] = {{"spec", config_spec}, {"hash", hash}};
    manifest.data()["budget"] = {{"kind", budget_text}, {"amount", budget.amount},
                                 {"flops_counts_backward_as", "3x forward"}};
    manifest.data()["optim"] = {{"peak_lr", peak_lr}, {"batch_frames", batch_frames}, {"loss", loss_name}};
    json rows = json::array();

    TrainState state = train(model, video, budget, optim, common.seed, [&](const EpochRow& row) {
        rows.push_back({{"epoch", row.epoch},
                        {"loss", row.loss},
                        {"psnr", psnr_for_report(row.psnr)},
                        {"elapsed_s", row.elapsed_s},
                        {"flops", row.flops_done},
                        {"lr", row.lr}});
        std::cout << "epoch " << row.epoch << "  loss " << fmt(row.loss) << "  psnr "
                  << fmt(psnr_for_report(row.psnr), "%.2f") << " dB  (" << fmt(row.elapsed_s, "%.1f") << " s)\n";
    });
    manifest.data()["epochs"] = rows;
    manifest.data()["best"] = {{"epoch", state.best_epoch}, {"psnr", psnr_for_report(state.best_psnr)}};

    save_checkpoint(out, hash, model.params());
    manifest.artifact(out);
    manifest.write(out);
    std::cout << "best epoch " << state.best_epoch << " at " << fmt(psnr_for_report(state.best_psnr), "%.2f")
              << " dB -> " << out << "\n";
    return 0;
}

int cmd_compress(const std::string& config_spec, const std::string& checkpoint, int bits, const std::string& out,
                 int grid_frames, const CommonArgs& common) {
    OutputPolicy policy{common.force};
    policy.check(out);
    ModelConfig config = load_config_arg(config_spec, grid_frames);
    std::string hash = config_hash(config);
    Model model(config, 0);
    load_checkpoint(checkpoint, hash, model.params());
    Bitstream stream = compress_model(model, hash, bits);
    write_bytes(out, stream.serialize());

    ManifestBuilder manifest("compress", common.seed);
    manifest.input("checkpoint", checkpoint);
    manifest.data()["config"] = {{"spec", config_spec}, {"hash", hash}};
    manifest.data()["bits"] = bits;
    manifest.data()["bytes"] = fs::file_size(out);
    manifest.artifact(out);
    manifest.write(out);
    std::cout << "wrote " << fs::file_size(out) << " bytes at " << bits << " bits -> " << out << "\n";
    return 0;
}

int cmd_decompress(const std::string& config_spec, const std::string& bitstream_path, const std::string& out,
                   int grid_frames, const CommonArgs& common) {
    OutputPolicy policy{common.force};
    policy.check(out);
    ModelConfig config = load_config_arg(config_spec, grid_frames);
    std::string hash = config_hash(config);
    Bitstream stream = Bitstream::deserialize(read_bytes(bitstream_path));
    Model model = decompress_model(stream, config, hash);
    save_checkpoint(out, hash, model.params());

    ManifestBuilder manifest("decompress", common.seed);
    manifest.input("bitstream", bitstream_path);
    manifest.data()["config"] = {{"spec", config_spec}, {"hash", hash}};
    manifest.artifact(out);
    manifest.write(out);
    std::cout << "restored checkpoint -> " << out << "\n";
    return 0;
}

int cmd_eval(const std::string& config_spec, const std::string& checkpoint, const std::string& bitstream_path,
             const std::string& frames_dir, const std::string& out, const std::string& metrics,
             const std::string& psnr_mode, int grid_frames, const CommonArgs& common) {
    OutputPolicy policy{common.force};
    policy.check(out);
    ModelConfig config = load_config_arg(config_spec, grid_frames);
    std::string hash = config_hash(config);
    Model model(config, 0);
    if (!checkpoint.empty()) {
        load_checkpoint(checkpoint, hash, model.params());
    } else if (!bitstream_path.empty()) {
        model = decompress_model(Bitstream::deserialize(read_bytes(bitstream_path)), config, hash);
    } else {
        throw ConfigError("eval needs --checkpoint or --bitstream");
    }
    VideoTensor video = ingest_frames(frames_dir);
    VideoTensor rec = render_video(model, video.num_frames(), video.frame_rate, config.name);

    bool want_msssim = metrics.find("msssim") != std::string::npos;
    PsnrMode mode = psnr_mode == "avg_psnr" ? PsnrMode::average_psnr : PsnrMode::average_mse;
    MetricReport report = evaluate(rec, video, want_msssim, mode);

    json row;
    row["name"] = config.name;
    row["psnr"] = psnr_for_report(report.psnr);
    if (want_msssim) row["ms_ssim"] = report.ms_ssim;
    row["per_frame_psnr"] = json::array();
    for (double v : report.per_frame_psnr) row["per_frame_psnr"].push_back(psnr_for_report(v));
    std::ofstream f(out);
    if (!f) throw DataError("cannot write report: " + out);
    f << row.dump() << "\n";

    ManifestBuilder manifest("eval", common.seed);
    manifest.input_dir("frames", frames_dir);
    if (!checkpoint.empty()) manifest.input("checkpoint", checkpoint);
    if (!bitstream_path.empty()) manifest.input("bitstream", bitstream_path);
    manifest.data()["config"] = {{"spec", config_spec}, {"hash", hash}};
    manifest.artifact(out);
    manifest.write(out);
    std::cout << "psnr " << fmt(psnr_for_report(report.psnr), "%.2f") << " dB";
    if (want_msssim) std::cout << "  ms-ssim " << fmt(report.ms_ssim, "%.4f");
    std::cout << " -> " << out << "\n";
    return 0;
}

int cmd_rd(const std::vector<std::string>& config_specs, const std::vector<std::string>& checkpoints,
           const std::string& frames_dir, const std::string& bits_list, const std::string& metric,
           const std::string& out_csv, const std::string& out_plot, int grid_frames, const CommonArgs& common) {
    if (config_specs.size() != checkpoints.size() || config_specs.empty())
        throw ConfigError("rd needs matching --config/--checkpoint pairs");
    OutputPolicy policy{common.force};
    policy.check(out_csv);
    if (!out_plot.empty()) policy.check(out_plot);
    VideoTensor video = ingest_frames(frames_dir);

    std::vector<int> bit_widths;
    {
        std::stringstream ss(bits_list);
        std::string tok;
        while (std::getline(ss, tok, ',')) bit_widths.push_back(std::stoi(tok));
    }
    bool use_msssim = metric == "msssim";
    if (use_msssim && !ms_ssim_supported(video.height(), video.width()))
        throw ConfigError("frames are too small for ms-ssim; use --metric psnr");

    ManifestBuilder manifest("rd", common.seed);
    manifest.input_dir("frames", frames_dir);
    std::vector<RDPoint> points;
    std::vector<std::vector<std::string>> raw_rows;
    const std::int64_t pixels = video.num_frames() * video.height() * video.width();

    for (std::size_t mi = 0; mi < config_specs.size(); ++mi) {
        ModelConfig config = load_config_arg(config_specs[mi], grid_frames);
        std::string hash = config_hash(config);
        Model model(config, 0);
        load_checkpoint(checkpoints[mi], hash, model.params());
        manifest.input("checkpoint" + std::to_string(mi), checkpoints[mi]);
        std::int64_t params = count_params(config);
        for (int bits : bit_widths) {
            Bitstream stream = compress_model(model, hash, bits);
            std::size_t coded_bytes = stream.byte_size();
            Model rec = decompress_model(stream, config, hash);
            VideoTensor rendered = render_video(rec, video.num_frames(), video.frame_rate, config.name);
            double quality = use_msssim ? ms_ssim(rendered, video) : psnr_for_report(psnr(rendered, video));
            double coded_bpp =
                bpp(8.0 * static_cast<double>(coded_bytes), video.num_frames(), video.height(), video.width());
            double raw_bpp = static_cast<double>(params) * bits / static_cast<double>(pixels);
            std::string label = config.name + "@" + std::to_string(bits) + "b";
            points.push_back({coded_bpp, quality, label});
            raw_rows.push_back({label, std::to_string(params), std::to_string(bits), fmt(coded_bpp, "%.6f"),
                                fmt(raw_bpp, "%.6f"), fmt(quality, "%.6f")});
            std::cout << label << "  bpp " << fmt(coded_bpp, "%.4f") << "  " << metric << " " << fmt(quality, "%.4f")
                      << "\n";
        }
    }

    std::vector<RDPoint> curve = rd_curve(points);
    std::vector<std::vector<std::string>> rows = raw_rows;
    for (auto& row : rows) {
        bool kept = false;
        for (const RDPoint& p : curve) kept = kept || p.label == row[0];
        row.push_back(kept ? "1" : "0");
    }
    write_csv(out_csv, {"label", "params", "bits", "bpp_coded", "bpp_raw", metric, "on_curve"}, rows);
    manifest.artifact(out_csv);

    if (!out_plot.empty()) {
        PlotSeries all{"all points", {}};
        for (const RDPoint& p : points) all.points.push_back({p.bpp, p.quality});
        std::sort(all.points.begin(), all.points.end());
        PlotSeries kept{"rd curve", {}};
        for (const RDPoint& p : curve) kept.points.push_back({p.bpp, p.quality});
        write_svg_plot(out_plot, {all, kept}, "bpp", metric, "rate-distortion");
        manifest.artifact(out_plot);
    }
    manifest.write(out_csv);
    return 0;
}

int cmd_bench(const std::vector<std::string>& config_specs, const std::string& frames_dir,
              const std::string& reference, int epochs_sample, double peak_lr, int batch_frames,
              const std::string& out_csv, int grid_frames, const CommonArgs& common) {
    OutputPolicy policy{common.force};
    policy.check(out_csv);
    VideoTensor video = ingest_frames(frames_dir);
    int gf = grid_frames > 0 ? grid_frames : std::max<int>(2, static_cast<int>(video.num_frames() / 4));

    auto colon = reference.rfind(':');
    if (colon == std::string::npos) throw ConfigError("reference must look like nerv:300");
    std::string ref_name = reference.substr(0, colon);
    double ref_epochs = std::stod(reference.substr(colon + 1));
    ModelConfig ref_config = load_config_arg(ref_name, gf);
    if (ref_config.target_resolution != std::array<std::int64_t, 2>{video.height(), video.width()})
        throw ConfigError("reference config resolution does not match the frames");

    OptimSpec optim;
    optim.peak_lr = peak_lr;
    optim.batch_frames = batch_frames;
    double s_per_epoch = calibrate_reference(ref_config, video, epochs_sample, common.seed, optim);
    TrainBudget budget = TrainBudget::wall_seconds(s_per_epoch * ref_epochs, reference);
    std::cout << "reference " << reference << ": " << fmt(s_per_epoch, "%.3f") << " s/epoch -> budget "
              << fmt(budget.amount, "%.2f") << " s\n";

    ManifestBuilder manifest("bench", common.seed);
    manifest.input_dir("frames", frames_dir);
    manifest.data()["reference"] = {{"spec", reference},
                                    {"seconds_per_epoch", s_per_epoch},
                                    {"epochs_sample", epochs_sample},
                                    {"budget_seconds", budget.amount}};

    std::vector<std::vector<std::string>> rows;
    for (const std::string& spec : config_specs) {
        ModelConfig config = load_config_arg(spec, gf);
        Model model(config, common.seed);
        TrainState state = train(model, video, budget, optim, common.seed);
        double own_s_per_epoch = state.history.empty()
                                     ? state.elapsed
                                     : state.history.back().elapsed_s / static_cast<double>(state.history.size());
        VideoTensor rec = render_video(model, video.num_frames());
        rows.push_back({config.name, std::to_string(count_params(config)), std::to_string(estimate_flops(config)),
                        fmt(own_s_per_epoch, "%.4f"), fmt(psnr_for_report(psnr(rec, video)), "%.3f")});
        std::cout << config.name << "  " << rows.back()[1] << " params  " << rows.back()[3] << " s/epoch  "
                  << rows.back()[4] << " dB\n";
    }
    write_csv(out_csv, {"config", "params", "flops_per_frame", "seconds_per_epoch", "psnr"}, rows);
    manifest.artifact(out_csv);
    manifest.write(out_csv);
    return 0;
}

int cmd_hyper_train(const std::string& config_spec, const std::vector<std::string>& frame_dirs, std::int64_t steps,
                    int batch_clips, double lr, const std::string& out, const CommonArgs& common) {
    OutputPolicy policy{common.force};
    policy.check(out);
    HyperConfig config = fs::exists(config_spec) ? load_hyper_config(config_spec) : preset_hyper_config(config_spec);
    std::string hash = config_hash(config);
    std::vector<VideoTensor> clips = cut_clips(frame_dirs, config.hypo.clip_frames);
    for (const VideoTensor& c : clips)
        if (c.height() != config.hypo.clip_resolution[0] || c.width() != config.hypo.clip_resolution[1])
            throw ConfigError("clip resolution does not match the hyper config");

    HyperNet net(config, common.seed);
    HyperTrainOptions opts;
    opts.steps = steps;
    opts.batch_clips = batch_clips;
    opts.lr = lr;
    opts.seed = common.seed;
    opts.on_step = [&](std::int64_t step, double loss) {
        if (step % 50 == 0 || step + 1 == steps) std::cout << "step " << step << "  loss " << fmt(loss) << "\n";
    };
    HyperTrainResult result = hyper_train(net, clips, opts);
    save_checkpoint(out, hash, net.params());

    ManifestBuilder manifest("hyper-train", common.seed);
    for (std::size_t i = 0; i < frame_dirs.size(); ++i)
        manifest.input_dir("frames" + std::to_string(i), frame_dirs[i]);
    manifest.data()["config"] = {{"spec", config_spec}, {"hash", hash}};
    manifest.data()["steps"] = steps;
    manifest.data()["clips"] = clips.size();
    manifest.data()["final_loss"] = result.final_loss;
    manifest.artifact(out);
    manifest.write(out);
    std::cout << "trained on " << clips.size() << " clips, final loss " << fmt(result.final_loss) << " -> " << out
              << "\n";
    return 0;
}

int cmd_hyper_encode(const std::string& config_spec, const std::string& checkpoint, const std::string& frames_dir,
                     const std::string& mask, int bits, const std::string& out_dir, const CommonArgs& common) {
    HyperConfig config = fs::exists(config_spec) ? load_hyper_config(config_spec) : preset_hyper_config(config_spec);
    std::string hash = config_hash(config);
    HyperNet net(config, 0);
    load_checkpoint(checkpoint, hash, net.params());
    bool mask_on = mask == "on";
    if (!mask_on && mask != "off") throw ConfigError("--mask must be on or off");

    std::vector<VideoTensor> clips = cut_clips({frames_dir}, config.hypo.clip_frames);
    fs::create_directories(out_dir);
    OutputPolicy policy{common.force};

    ManifestBuilder manifest("hyper-encode", common.seed);
    manifest.input_dir("frames", frames_dir);
    manifest.input("checkpoint", checkpoint);
    manifest.data()["config"] = {{"spec", config_spec}, {"hash", hash}};
    manifest.data()["mask"] = mask_on;
    manifest.data()["bits"] = bits;

    std::size_t total_bytes = 0;
    for (std::size_t i = 0; i < clips.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "clip_%05zu.nrvh", i);
        std::string path = (fs::path(out_dir) / name).string();
        policy.check(path);
        ClipBitstream stream = encode_clip(net, clips[i], mask_on, bits, hash);
        auto bytes = stream.serialize();
        write_bytes(path, bytes);
        total_bytes += bytes.size();
        manifest.artifact(path);
    }
    const auto& hy = config.hypo;
    double clip_bpp =
        bpp(8.0 * static_cast<double>(total_bytes), static_cast<std::int64_t>(clips.size()) * hy.clip_frames,
            hy.clip_resolution[0], hy.clip_resolution[1]);
    manifest.data()["bytes"] = total_bytes;
    manifest.data()["bpp"] = clip_bpp;
    manifest.write((fs::path(out_dir) / "encode").string());
    std::cout << clips.size() << " clips, " << total_bytes << " bytes, " << fmt(clip_bpp, "%.4f") << " bpp -> "
              << out_dir << "\n";
    return 0;
}

int cmd_hyper_decode(const std::string& config_spec, const std::string& checkpoint, const std::string& in_path,
                     const std::string& out_dir, const CommonArgs& common) {
    HyperConfig config = fs::exists(config_spec) ? load_hyper_config(config_spec) : preset_hyper_config(config_spec);
    std::string hash = config_hash(config);
    HyperNet net(config, 0);
    load_checkpoint(checkpoint, hash, net.params());

    std::vector<std::string> streams;
    if (fs::is_directory(in_path)) {
        for (const auto& e : fs::directory_iterator(in_path))
            if (e.path().extension() == ".nrvh") streams.push_back(e.path().string());
        std::sort(streams.begin(), streams.end());
    } else {
        streams.push_back(in_path);
    }
    if (streams.empty()) throw DataError("no .nrvh clip bitstreams under " + in_path);

    ManifestBuilder manifest("hyper-decode", common.seed);
    manifest.input("checkpoint", checkpoint);
    fs::create_directories(out_dir);
    std::int64_t frame_index = 0;
    for (const std::string& s : streams) {
        ClipBitstream stream = ClipBitstream::deserialize(read_bytes(s));
        VideoTensor clip = decode_clip(net, stream, hash);
        for (std::int64_t f = 0; f < clip.num_frames(); ++f, ++frame_index) {
            char name[32];
            std::snprintf(name, sizeof(name), "frame_%05lld.png", static_cast<long long>(frame_index));
            std::string path = (fs::path(out_dir) / name).string();
            OutputPolicy{common.force}.check(path);
            write_frame_png(path, clip.frame_chw(f));
            manifest.artifact(path);
        }
    }
    manifest.write((fs::path(out_dir) / "decode").string());
    std::cout << "decoded " << frame_index << " frames -> " << out_dir << "\n";
    return 0;
}

int cmd_dissect(const std::string& config_spec, const std::string& checkpoint, const std::string& frame_range,
                std::int64_t num_frames, const std::string& out_dir, int top, int grid_frames,
                const CommonArgs& common) {
    ModelConfig config = load_config_arg(config_spec, grid_frames);
    std::string hash = config_hash(config);
    Model model(config, 0);
    load_checkpoint(checkpoint, hash, model.params());
    auto [lo, hi] = parse_frame_range(frame_range);
    if (lo < 0 || hi < lo || hi >= num_frames) throw ConfigError("frame range out of bounds for --num-frames");
    fs::create_directories(out_dir);

    ManifestBuilder manifest("dissect", common.seed);
    manifest.input("checkpoint", checkpoint);
    manifest.data()["config"] = {{"spec", config_spec}, {"hash", hash}};
    std::vector<std::vector<std::string>> rows;
    for (std::int64_t f = lo; f <= hi; ++f) {
        double t = num_frames > 1 ? static_cast<double>(f) / static_cast<double>(num_frames - 1) : 0.0;
        ContributionMaps maps = head_contributions(model, t);
        std::vector<std::int64_t> order = sort_by_magnitude(maps.maps);
        KernelTotals totals = kernel_totals(maps.maps);
        std::int64_t emit = top > 0 ? std::min<std::int64_t>(top, maps.maps.dim(0)) : maps.maps.dim(0);
        double norm = maps.maps.abs_max();
        for (std::int64_t rank = 0; rank < emit; ++rank) {
            std::int64_t k = order[rank];
            Tensor map({maps.maps.dim(1), maps.maps.dim(2)});
            std::copy(maps.maps.data() + k * map.numel(), maps.maps.data() + (k + 1) * map.numel(), map.data());
            char name[96];
            std::snprintf(name, sizeof(name), "frame%04lld_rank%04lld_k%04lld.png", static_cast<long long>(f),
                          static_cast<long long>(rank), static_cast<long long>(k));
            std::string path = (fs::path(out_dir) / name).string();
            OutputPolicy{common.force}.check(path);
            write_map_png(path, map, /*diverging=*/true, norm);
            manifest.artifact(path);
        }
        for (std::int64_t k = 0; k < maps.maps.dim(0); ++k)
            rows.push_back({std::to_string(f), std::to_string(k), std::to_string(maps.kernel_index[k][0]),
                            std::to_string(maps.kernel_index[k][1]), fmt(totals.sum[k]), fmt(totals.abs_sum[k])});
    }
    std::string csv = (fs::path(out_dir) / "contributions.csv").string();
    OutputPolicy{common.force}.check(csv);
    write_csv(csv, {"frame", "kernel", "c_in", "c_out", "total", "total_abs"}, rows);
    manifest.artifact(csv);
    manifest.write((fs::path(out_dir) / "dissect").string());
    std::cout << "wrote contribution maps and " << csv << "\n";
    return 0;
}

int cmd_dissect_motion(const std::string& config_spec, const std::string& checkpoint, const std::string& frame_range,
                       std::int64_t num_frames, const std::string& out_dir, int grid_frames,
                       const CommonArgs& common) {
    ModelConfig config = load_config_arg(config_spec, grid_frames);
    std::string hash = config_hash(config);
    Model model(config, 0);
    load_checkpoint(checkpoint, hash, model.params());
    auto [lo, hi] = parse_frame_range(frame_range);
    if (lo < 0 || hi <= lo || hi >= num_frames) throw ConfigError("motion needs at least two frames in range");
    fs::create_directories(out_dir);

    ManifestBuilder manifest("dissect-motion", common.seed);
    manifest.input("checkpoint", checkpoint);
    manifest.data()["config"] = {{"spec", config_spec}, {"hash", hash}};
    ContributionMaps prev = head_contributions(model, static_cast<double>(lo) / (num_frames - 1));
    for (std::int64_t f = lo + 1; f <= hi; ++f) {
        ContributionMaps cur = head_contributions(model, static_cast<double>(f) / (num_frames - 1));
        Tensor fluct = motion_fluctuation(prev, cur);
        char name[64];
        std::snprintf(name, sizeof(name), "motion_%04lld_%04lld.png", static_cast<long long>(f - 1),
                      static_cast<long long>(f));
        std::string path = (fs::path(out_dir) / name).string();
        OutputPolicy{common.force}.check(path);
        write_map_png(path, fluct, /*diverging=*/false);
        manifest.artifact(path);
        prev = std::move(cur);
    }
    manifest.write((fs::path(out_dir) / "dissect-motion").string());
    std::cout << "wrote motion fluctuation maps -> " << out_dir << "\n";
    return 0;
}

int cmd_synth(const std::string& out_dir, std::int64_t frames, const std::string& size, const CommonArgs& common) {
    auto x = size.find('x');
    if (x == std::string::npos) throw ConfigError("--size must look like 64x128");
    std::int64_t h = std::stoll(size.substr(0, x)), w = std::stoll(size.substr(x + 1));
    VideoTensor video = make_synthetic_video(frames, h, w, common.seed);
    fs::create_directories(out_dir);
    if (!common.force && !fs::is_empty(out_dir)) throw DataError("output directory not empty: " + out_dir);
    auto paths = write_frames(out_dir, video);
    ManifestBuilder manifest("synth", common.seed);
    for (const std::string& p : paths) manifest.artifact(p);
    manifest.write((fs::path(out_dir) / "synth").string());
    std::cout << "wrote " << paths.size() << " frames -> " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nervkit: composable video INR compression toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // accept --seed/--force after the subcommand name

    CommonArgs common;
    app.add_option("--seed", common.seed, "RNG seed (recorded in manifests)")->capture_default_str();
    app.add_flag("--force", common.force, "overwrite existing outputs");

    std::string config_spec, frames_dir, out, budget_text = "epochs:300", loss_name = "mse";
    std::string checkpoint, bitstream_path, metrics = "psnr,msssim", psnr_mode = "avg_mse";
    std::string bits_list = "8,7,6,5,4", metric = "psnr", out_csv, out_plot, reference = "nerv:300";
    std::string mask = "off", frame_range = "0..0", size = "64x128", in_path;
    std::vector<std::string> config_specs, checkpoints, frame_dirs;
    double peak_lr = 2e-3, alpha = 0.7, lr = 1e-4;
    int batch_frames = 1, bits = 8, epochs_sample = 2, grid_frames = 0, top = 0, batch_clips = 4;
    std::int64_t steps = 1000, num_frames = 8, synth_frames = 8;

    auto* train_cmd = app.add_subcommand("train", "fit a model to a frame directory");
    train_cmd->add_option("--config", config_spec, "config file or preset name")->required();
    train_cmd->add_option("--frames", frames_dir)->required();
    train_cmd->add_option("--out", out, "output checkpoint (.nrvc)")->required();
    train_cmd->add_option("--budget", budget_text, "epochs:N | seconds:S | flops:F")->capture_default_str();
    train_cmd->add_option("--peak-lr", peak_lr)->capture_default_str();
    train_cmd->add_option("--batch-frames", batch_frames)->capture_default_str();
    train_cmd->add_option("--loss", loss_name, "mse | l1_ssim")->capture_default_str();
    train_cmd->add_option("--alpha", alpha, "l1_ssim mixing weight")->capture_default_str();
    train_cmd->add_option("--grid-frames", grid_frames, "override preset grid frames (0 = T/4)");

    auto* compress_cmd = app.add_subcommand("compress", "quantize + entropy-code a checkpoint");
    compress_cmd->add_option("--config", config_spec)->required();
    compress_cmd->add_option("--checkpoint", checkpoint)->required();
    compress_cmd->add_option("--bits", bits)->check(CLI::Range(4, 8))->capture_default_str();
    compress_cmd->add_option("--out", out, "output bitstream (.nrvb)")->required();
    compress_cmd->add_option("--grid-frames", grid_frames);

    auto* decompress_cmd = app.add_subcommand("decompress", "rebuild a checkpoint from a bitstream");
    decompress_cmd->add_option("--config", config_spec)->required();
    decompress_cmd->add_option("--bitstream", bitstream_path)->required();
    decompress_cmd->add_option("--out", out)->required();
    decompress_cmd->add_option("--grid-frames", grid_frames);

    auto* eval_cmd = app.add_subcommand("eval", "score a model against source frames");
    eval_cmd->add_option("--config", config_spec)->required();
    eval_cmd->add_option("--checkpoint", checkpoint);
    eval_cmd->add_option("--bitstream", bitstream_path);
    eval_cmd->add_option("--frames", frames_dir)->required();
    eval_cmd->add_option("--out", out, "JSONL report")->required();
    eval_cmd->add_option("--metrics", metrics, "psnr[,msssim]")->capture_default_str();
    eval_cmd->add_option("--psnr-mode", psnr_mode, "avg_mse | avg_psnr")->capture_default_str();
    eval_cmd->add_option("--grid-frames", grid_frames);

    auto* rd_cmd = app.add_subcommand("rd", "rate-distortion sweep over bit widths");
    rd_cmd->add_option("--config", config_specs)->required();
    rd_cmd->add_option("--checkpoint", checkpoints)->required();
    rd_cmd->add_option("--frames", frames_dir)->required();
    rd_cmd->add_option("--bits", bits_list)->capture_default_str();
    rd_cmd->add_option("--metric", metric, "psnr | msssim")->capture_default_str();
    rd_cmd->add_option("--out-csv", out_csv)->required();
    rd_cmd->add_option("--out-plot", out_plot, "SVG plot path");
    rd_cmd->add_option("--grid-frames", grid_frames);

    auto* bench_cmd = app.add_subcommand("bench", "equal-time training report");
    bench_cmd->add_option("--config", config_specs)->required();
    bench_cmd->add_option("--frames", frames_dir)->required();
    bench_cmd->add_option("--reference", reference, "preset-or-config:epochs")->capture_default_str();
    bench_cmd->add_option("--epochs-sample", epochs_sample)->capture_default_str();
    bench_cmd->add_option("--peak-lr", peak_lr)->capture_default_str();
    bench_cmd->add_option("--batch-frames", batch_frames)->capture_default_str();
    bench_cmd->add_option("--out-csv", out_csv)->required();
    bench_cmd->add_option("--grid-frames", grid_frames);

    auto* htrain_cmd = app.add_subcommand("hyper-train", "train a hyper-network over clip datasets");
    htrain_cmd->add_option("--config", config_spec, "hyper config file or preset")->required();
    htrain_cmd->add_option("--frames", frame_dirs, "one or more frame directories")->required();
    htrain_cmd->add_option("--steps", steps)->capture_default_str();
    htrain_cmd->add_option("--batch-clips", batch_clips)->capture_default_str();
    htrain_cmd->add_option("--lr", lr)->capture_default_str();
    htrain_cmd->add_option("--out", out)->required();

    auto* hencode_cmd = app.add_subcommand("hyper-encode", "encode clips with one forward pass");
    hencode_cmd->add_option("--config", config_spec)->required();
    hencode_cmd->add_option("--checkpoint", checkpoint)->required();
    hencode_cmd->add_option("--frames", frames_dir)->required();
    hencode_cmd->add_option("--mask", mask, "on | off")->capture_default_str();
    hencode_cmd->add_option("--bits", bits)->check(CLI::Range(4, 8))->capture_default_str();
    hencode_cmd->add_option("--out", out, "output directory for .nrvh clip bitstreams")->required();

    auto* hdecode_cmd = app.add_subcommand("hyper-decode", "decode clip bitstreams to frames");
    hdecode_cmd->add_option("--config", config_spec)->required();
    hdecode_cmd->add_option("--checkpoint", checkpoint)->required();
    hdecode_cmd->add_option("--bitstream", in_path, ".nrvh file or directory")->required();
    hdecode_cmd->add_option("--out", out, "output frame directory")->required();

    auto* dissect_cmd = app.add_subcommand("dissect", "head-layer kernel contribution maps");
    dissect_cmd->add_option("--config", config_spec)->required();
    dissect_cmd->add_option("--checkpoint", checkpoint)->required();
    dissect_cmd->add_option("--frames", frame_range, "frame index range a..b")->capture_default_str();
    dissect_cmd->add_option("--num-frames", num_frames, "video length for t normalization")->required();
    dissect_cmd->add_option("--out", out)->required();
    dissect_cmd->add_option("--top", top, "emit only the top-K kernels by magnitude (0 = all)");
    dissect_cmd->add_option("--grid-frames", grid_frames);

    auto* motion_cmd = app.add_subcommand("dissect-motion", "contribution fluctuation between adjacent frames");
    motion_cmd->add_option("--config", config_spec)->required();
    motion_cmd->add_option("--checkpoint", checkpoint)->required();
    motion_cmd->add_option("--frames", frame_range)->capture_default_str();
    motion_cmd->add_option("--num-frames", num_frames)->required();
    motion_cmd->add_option("--out", out)->required();
    motion_cmd->add_option("--grid-frames", grid_frames);

    auto* synth_cmd = app.add_subcommand("synth", "write a deterministic synthetic test video");
    synth_cmd->add_option("--out", out)->required();
    synth_cmd->add_option("--frames", synth_frames)->capture_default_str();
    synth_cmd->add_option("--size", size, "HxW")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*train_cmd)
            return cmd_train(config_spec, frames_dir, out, budget_text, peak_lr, batch_frames, loss_name, alpha,
                             grid_frames, common);
        if (*compress_cmd) return cmd_compress(config_spec, checkpoint, bits, out, grid_frames, common);
        if (*decompress_cmd) return cmd_decompress(config_spec, bitstream_path, out, grid_frames, common);
        if (*eval_cmd)
            return cmd_eval(config_spec, checkpoint, bitstream_path, frames_dir, out, metrics, psnr_mode,
                            grid_frames, common);
        if (*rd_cmd)
            return cmd_rd(config_specs, checkpoints, frames_dir, bits_list, metric, out_csv, out_plot, grid_frames,
                          common);
        if (*bench_cmd)
            return cmd_bench(config_specs, frames_dir, reference, epochs_sample, peak_lr, batch_frames, out_csv,
                             grid_frames, common);
        if (*htrain_cmd) return cmd_hyper_train(config_spec, frame_dirs, steps, batch_clips, lr, out, common);
        if (*hencode_cmd) return cmd_hyper_encode(config_spec, checkpoint, frames_dir, mask, bits, out, common);
        if (*hdecode_cmd) return cmd_hyper_decode(config_spec, checkpoint, in_path, out, common);
        if (*dissect_cmd)
            return cmd_dissect(config_spec, checkpoint, frame_range, num_frames, out, top, grid_frames, common);
        if (*motion_cmd)
            return cmd_dissect_motion(config_spec, checkpoint, frame_range, num_frames, out, grid_frames, common);
        if (*synth_cmd) return cmd_synth(out, synth_frames, size, common);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 4;
    } catch (const ContractViolation& e) {
        std::cerr << "internal contract violation: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
