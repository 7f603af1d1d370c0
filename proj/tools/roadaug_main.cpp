// Copyright 2026 The roadaug Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// roadaug: severity-graded pothole augmentation for detection datasets.
//
// The workflow is staged so the expensive parts (GAN training) are
// resumable:
//   ingest -> extract-rois -> train-gan -> gen-gallery ->
//   (match | synth-texture | augment) -> report
//
// Exit codes: 0 success, 1 usage error, 2 input/data error,
// 3 numerical failure.

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "roadaug/dataset.hpp"
#include "roadaug/image_io.hpp"
#include "roadaug/kernels.hpp"
#include "roadaug/pipeline.hpp"
#include "roadaug/run_config.hpp"

namespace {

namespace fs = std::filesystem;
using namespace roadaug;
using nlohmann::json;

struct GlobalFlags {
    std::string config_path;
    std::optional<std::string> out_override;
    std::optional<std::uint64_t> seed_override;
    std::optional<int> jobs_override;
    bool dry_run = false;
};

cfg::RunConfig load_config(const GlobalFlags& flags) {
    cfg::RunConfig config = flags.config_path.empty()
                                ? cfg::parse_config_text("{}")
                                : cfg::parse_config(flags.config_path);
    // Precedence: flags > file > defaults. Seed overrides re-derive every
    // nested seed that the file left implicit, so re-parse with the
    // substituted global seed instead of patching fields one by one.
    if (flags.seed_override) {
        json patch = flags.config_path.empty()
                         ? json::object()
                         : json::parse(std::ifstream(flags.config_path));
        patch["seed"] = *flags.seed_override;
        config = cfg::parse_config_text(patch.dump(), "<flags>");
    }
    if (flags.out_override) config.output_root = *flags.out_override;
    if (flags.jobs_override) config.jobs = *flags.jobs_override;
    return config;
}

void apply_jobs(const cfg::RunConfig& config) {
    kernels::set_max_threads(config.jobs);
#ifdef _OPENMP
    if (config.jobs > 0) omp_set_num_threads(config.jobs);
#endif
}

void echo_config(const cfg::RunConfig& config) {
    fs::create_directories(config.output_root);
    std::ofstream out(config.output_root / "effective_config.json");
    if (!out)
        throw InputError("cannot write effective config under " +
                         config.output_root.string());
    out << cfg::effective_config_json(config);
}

data::DatasetIndex require_index(const cfg::RunConfig& config) {
    const fs::path path = config.output_root / "index.json";
    if (!fs::exists(path))
        throw InputError("missing " + path.string() + "; run `ingest` first");
    return data::load_index(path);
}

std::string roi_file_name(const data::RoiRecord& roi) {
    return "roi_" + roi.image_id + "_" +
           std::to_string(roi.annotation_index) + ".png";
}

int cmd_ingest(const cfg::RunConfig& config) {
    if (config.dataset_root.empty())
        throw InputError("config: dataset_root is required for ingest");
    data::DatasetIndex index = data::ingest(config.dataset_root);
    if (!index.records.empty())
        data::split(index, config.split_train_fraction, config.split_seed);
    data::save_index(index, config.output_root / "index.json");
    std::cerr << "ingest: " << index.records.size() << " records ("
              << index.count(data::Split::kTrain) << " train / "
              << index.count(data::Split::kValidation) << " validation)\n";
    return 0;
}

int cmd_extract_rois(const cfg::RunConfig& config) {
    const data::DatasetIndex index = require_index(config);
    const std::vector<data::RoiRecord> rois = data::extract_rois(
        index, config.target_class, data::SubsetFilter::kTrain);
    const fs::path roi_dir = config.output_root / "rois";
    fs::create_directories(roi_dir);
    json manifest = json::array();
    for (const data::RoiRecord& roi : rois) {
        const std::string name = roi_file_name(roi);
        img::save_image(roi.roi, roi_dir / name);
        manifest.push_back({{"image_id", roi.image_id},
                            {"annotation_index", roi.annotation_index},
                            {"file", name}});
    }
    std::ofstream out(roi_dir / "manifest.json");
    out << manifest.dump(2) << "\n";
    std::cerr << "extract-rois: " << rois.size() << " " << config.target_class
              << " ROIs\n";
    return 0;
}

int cmd_train_gan(const cfg::RunConfig& config) {
    const fs::path roi_dir = config.output_root / "rois";
    const fs::path manifest_path = roi_dir / "manifest.json";
    if (!fs::exists(manifest_path))
        throw InputError("missing " + manifest_path.string() +
                         "; run `extract-rois` first");
    json manifest;
    std::ifstream in(manifest_path);
    in >> manifest;
    std::vector<img::ImageBuffer> rois;
    for (const json& entry : manifest)
        rois.push_back(
            img::load_image(roi_dir / entry.at("file").get<std::string>()));

    const gan::TrainResult result = gan::train(rois, config.gan);
    gan::save_checkpoint(result.checkpoint,
                         config.output_root / "checkpoint.json");

    std::ofstream log(config.output_root / "gan_train_log.csv");
    log << "step,critic_loss,wasserstein\n";
    log.precision(17);
    for (const gan::TrainStepLog& row : result.log)
        log << row.step << "," << row.critic_loss << "," << row.wasserstein
            << "\n";
    if (!result.log.empty())
        std::cerr << "train-gan: " << result.log.size()
                  << " critic steps, final W estimate "
                  << result.log.back().wasserstein << "\n";
    return 0;
}

int cmd_gen_gallery(const cfg::RunConfig& config) {
    const fs::path cp_path = config.output_root / "checkpoint.json";
    if (!fs::exists(cp_path))
        throw InputError("missing " + cp_path.string() +
                         "; run `train-gan` first");
    const gan::Checkpoint cp = gan::load_checkpoint(cp_path);
    const gan::GalleryManifest manifest = gan::generate_gallery(
        cp, config.gallery_count, config.gallery_seed,
        config.output_root / "gallery");
    std::cerr << "gen-gallery: " << manifest.entries.size() << " ROIs at "
              << manifest.roi_side << "x" << manifest.roi_side << "\n";
    return 0;
}

gan::GalleryManifest require_gallery(const cfg::RunConfig& config) {
    const fs::path path = config.output_root / "gallery" / "manifest.json";
    if (!fs::exists(path))
        throw InputError("missing gallery at " + path.string() +
                         "; run `gen-gallery` first");
    gan::GalleryManifest manifest = gan::load_gallery_manifest(path);
    if (manifest.entries.empty())
        throw InputError("gallery is empty: " + path.string());
    return manifest;
}

int cmd_match(const cfg::RunConfig& config) {
    const data::DatasetIndex index = require_index(config);
    const gan::GalleryManifest manifest = require_gallery(config);
    const std::vector<img::ImageBuffer> gallery = gan::load_gallery_images(
        manifest, config.output_root / "gallery");

    const std::vector<data::RoiRecord> rois = data::extract_rois(
        index, config.target_class, data::SubsetFilter::kTrain);
    std::ofstream out(config.output_root / "matches.jsonl");
    for (const data::RoiRecord& roi : rois) {
        const sim::MatchResult match =
            sim::match_roi(roi.roi, gallery, config.ssim);
        json line = {{"image_id", roi.image_id},
                     {"annotation_index", roi.annotation_index},
                     {"roi_id", manifest.entries[match.index].roi_id},
                     {"score", match.score}};
        out << line.dump() << "\n";
    }
    std::cerr << "match: " << rois.size() << " ROIs scored against "
              << manifest.entries.size() << " gallery entries\n";
    return 0;
}

int cmd_synth_texture(const cfg::RunConfig& config) {
    const data::DatasetIndex index = require_index(config);
    const tex::FeatureBank bank = tex::FeatureBank::make(config.bank);
    const std::vector<data::RoiRecord> rois = data::extract_rois(
        index, config.target_class, data::SubsetFilter::kTrain);
    const fs::path texture_dir = config.output_root / "textures";
    fs::create_directories(texture_dir);
    std::size_t done = 0, skipped = 0;
    for (const data::RoiRecord& roi : rois) {
        tex::TextureSynthConfig cfg = config.texture;
        cfg.init_seed =
            derive_seed(config.seed, roi.image_id, roi.annotation_index);
        try {
            const tex::SynthesisResult result =
                tex::synthesize_texture(roi.roi, bank, cfg);
            if (!result.converged)
                std::cerr << "warning: synthesis stalled for " << roi.image_id
                          << " #" << roi.annotation_index
                          << "; best iterate kept\n";
            img::save_image(result.image,
                            texture_dir / ("texture_" + roi.image_id + "_" +
                                           std::to_string(
                                               roi.annotation_index) +
                                           ".png"));
            ++done;
        } catch (const InputError& e) {
            std::cerr << "skip " << roi.image_id << " #"
                      << roi.annotation_index << ": " << e.what() << "\n";
            ++skipped;
        }
    }
    std::cerr << "synth-texture: " << done << " textures, " << skipped
              << " skipped\n";
    return 0;
}

int cmd_augment(const cfg::RunConfig& config, bool dry_run) {
    const data::DatasetIndex index = require_index(config);
    const gan::GalleryManifest manifest = require_gallery(config);
    const tex::FeatureBank bank = tex::FeatureBank::make(config.bank);

    pipe::AugmentOptions options;
    options.target_class = config.target_class;
    options.fraction = config.augment_fraction;
    options.poisson = config.poisson;
    options.seed = config.seed;

    const pipe::AugmentOutcome outcome = pipe::augment_dataset(
        index, manifest, config.output_root / "gallery", bank, config.presets,
        config.selection, config.ssim, config.texture, options,
        config.output_root, dry_run);

    if (dry_run) {
        for (const auto& [id, severity] : outcome.assignment)
            std::cout << id << "\t" << severity << "\n";
        std::cerr << "augment (dry run): " << outcome.assignment.size()
                  << " assignments\n";
        return 0;
    }
    for (const pipe::SkipRecord& skip : outcome.skips)
        std::cerr << "skip " << skip.image_id << ": " << skip.reason << "\n";
    std::cerr << "augment: " << outcome.records.size()
              << " augmented images, " << outcome.skips.size()
              << " skipped\n";
    return 0;
}

int cmd_report(const cfg::RunConfig& config, const std::string& metrics_path,
               const std::string& baseline) {
    const std::vector<pipe::MetricsRecord> metrics =
        pipe::load_metrics(metrics_path);
    const pipe::Report report = pipe::build_report(metrics, baseline);
    pipe::write_report(report, config.output_root / "report.json",
                       config.output_root / "report.txt");
    std::cerr << pipe::report_text(report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "roadaug: GAN + texture-synthesis augmentation for road-damage "
        "datasets"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    GlobalFlags flags;
    std::string metrics_path;
    std::string baseline = "baseline";

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", flags.config_path,
                        "JSON configuration file");
        cmd->add_option_function<std::string>(
            "--out", [&](const std::string& v) { flags.out_override = v; },
            "output root (overrides config)");
        cmd->add_option_function<std::uint64_t>(
            "--seed", [&](std::uint64_t v) { flags.seed_override = v; },
            "global seed (overrides config)");
        cmd->add_option_function<int>(
            "--jobs", [&](int v) { flags.jobs_override = v; },
            "worker pool cap; 1 disables parallelism");
    };

    CLI::App* ingest = app.add_subcommand("ingest",
                                          "index a VOC-style dataset and "
                                          "assign the train/validation split");
    CLI::App* extract = app.add_subcommand(
        "extract-rois", "crop target-class ROIs from the training split");
    CLI::App* train = app.add_subcommand(
        "train-gan", "train the fully-connected WGAN-GP on extracted ROIs");
    CLI::App* gallery = app.add_subcommand(
        "gen-gallery", "sample a generated-ROI gallery from a checkpoint");
    CLI::App* match = app.add_subcommand(
        "match", "score training ROIs against the gallery (SSIM argmax)");
    CLI::App* synth = app.add_subcommand(
        "synth-texture", "synthesize road textures for training ROIs");
    CLI::App* augment = app.add_subcommand(
        "augment", "build the severity-augmented output dataset");
    CLI::App* report = app.add_subcommand(
        "report", "compare detector metrics against a baseline");

    for (CLI::App* cmd : {ingest, extract, train, gallery, match, synth,
                          augment, report})
        add_common(cmd);
    augment->add_flag("--dry-run", flags.dry_run,
                      "print the severity assignment without writing images");
    report->add_option("--metrics", metrics_path,
                       "JSON file with labeled P/R/F1/mAP records")
        ->required();
    report->add_option("--baseline", baseline,
                       "label of the baseline record");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // CLI11 prints its own message; normalize usage failures to 1.
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const cfg::RunConfig config = load_config(flags);
        apply_jobs(config);
        echo_config(config);
        if (ingest->parsed()) return cmd_ingest(config);
        if (extract->parsed()) return cmd_extract_rois(config);
        if (train->parsed()) return cmd_train_gan(config);
        if (gallery->parsed()) return cmd_gen_gallery(config);
        if (match->parsed()) return cmd_match(config);
        if (synth->parsed()) return cmd_synth_texture(config);
        if (augment->parsed()) return cmd_augment(config, flags.dry_run);
        if (report->parsed())
            return cmd_report(config, metrics_path, baseline);
        std::cerr << "no subcommand\n";
        return 1;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
