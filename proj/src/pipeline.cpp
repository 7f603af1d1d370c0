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

#include "roadaug/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "roadaug/image_io.hpp"
#include "roadaug/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include "roadaug/kernels.hpp"

namespace roadaug::pipe {

namespace fs = std::filesystem;
using nlohmann::json;

SelectionMode selection_mode_from_name(const std::string& name) {
    if (name == "unmixed_only") return SelectionMode::kUnmixedOnly;
    if (name == "single_severity") return SelectionMode::kSingleSeverity;
    if (name == "all_three") return SelectionMode::kAllThree;
    if (name == "random_one_to_one_to_one")
        return SelectionMode::kRandomOneToOneToOne;
    throw InputError("unknown selection mode: " + name);
}

std::string selection_mode_name(SelectionMode mode) {
    switch (mode) {
        case SelectionMode::kUnmixedOnly: return "unmixed_only";
        case SelectionMode::kSingleSeverity: return "single_severity";
        case SelectionMode::kAllThree: return "all_three";
        case SelectionMode::kRandomOneToOneToOne:
            return "random_one_to_one_to_one";
    }
    return "unknown";
}

std::vector<std::pair<std::string, std::string>> select_versions(
    const std::vector<std::string>& eligible_ids,
    const SelectionPolicy& policy,
    const std::vector<std::string>& severity_labels) {
    std::vector<std::pair<std::string, std::string>> out;
    switch (policy.mode) {
        case SelectionMode::kUnmixedOnly:
            for (const std::string& id : eligible_ids)
                out.emplace_back(id, "unmixed");
            return out;
        case SelectionMode::kSingleSeverity: {
            const bool known =
                std::find(severity_labels.begin(), severity_labels.end(),
                          policy.severity_label) != severity_labels.end();
            if (!known)
                throw InputError("selection severity '" +
                                 policy.severity_label +
                                 "' is not in the preset table");
            for (const std::string& id : eligible_ids)
                out.emplace_back(id, policy.severity_label);
            return out;
        }
        case SelectionMode::kAllThree:
            for (const std::string& id : eligible_ids)
                for (const std::string& label : severity_labels)
                    out.emplace_back(id, label);
            return out;
        case SelectionMode::kRandomOneToOneToOne:
            break;
    }

    if (eligible_ids.empty())
        throw ContractError("select_versions: random mode needs >= 1 id");
    // Shuffle both the ids and the severity rotation so the remainder
    // severities depend on the seed and every id is uniform over labels.
    std::vector<std::string> ids = eligible_ids;
    std::vector<std::string> labels = severity_labels;
    Rng rng(policy.seed);
    rng.shuffle(ids);
    rng.shuffle(labels);
    std::map<std::string, std::string> by_id;
    for (std::size_t i = 0; i < ids.size(); ++i)
        by_id[ids[i]] = labels[i % labels.size()];
    for (const std::string& id : eligible_ids)
        out.emplace_back(id, by_id.at(id));
    return out;
}

namespace {

void copy_bytes(const fs::path& from, const fs::path& to) {
    std::error_code ec;
    fs::copy_file(from, to, fs::copy_options::overwrite_existing, ec);
    if (ec)
        throw InputError("cannot copy " + from.string() + " to " +
                         to.string() + ": " + ec.message());
}

struct ImageTask {
    const data::AnnotatedImage* record = nullptr;
    std::vector<std::string> severities;  // versions assigned to this image
};

struct ImageOutput {
    std::vector<AugmentedRecord> records;
    std::optional<SkipRecord> skip;
};

const blend::SeverityPreset& preset_by_label(
    const std::vector<blend::SeverityPreset>& presets,
    const std::string& label) {
    for (const blend::SeverityPreset& p : presets)
        if (p.label == label) return p;
    throw InputError("severity label not in preset table: " + label);
}

ImageOutput process_image(const ImageTask& task,
                          const std::vector<img::ImageBuffer>& gallery_images,
                          const gan::GalleryManifest& gallery,
                          const tex::FeatureBank& bank,
                          const std::vector<blend::SeverityPreset>& presets,
                          const sim::SsimParams& ssim_params,
                          const tex::TextureSynthConfig& synth_config,
                          const AugmentOptions& options,
                          const fs::path& out_root, bool unmixed) {
    ImageOutput output;
    const data::AnnotatedImage& rec = *task.record;
    try {
        const img::ImageBuffer source = img::load_image(rec.image_path);

        struct RoiWork {
            std::size_t annotation_index;
            img::Box2D box;
            std::string matched_id;
            double score;
            img::ImageBuffer generated;  // matched gallery ROI at box size
            img::ImageBuffer texture;    // synthesized road texture
        };
        std::vector<RoiWork> rois;
        for (std::size_t k = 0; k < rec.annotations.size(); ++k) {
            const data::Annotation& ann = rec.annotations[k];
            if (ann.class_label != options.target_class) continue;
            RoiWork work;
            work.annotation_index = k;
            work.box = ann.box;
            const img::ImageBuffer roi = img::crop(source, ann.box);

            const sim::MatchResult match =
                sim::match_roi(roi, gallery_images, ssim_params);
            work.matched_id = gallery.entries[match.index].roi_id;
            work.score = match.score;
            work.generated = img::resize_bilinear(
                img::to_gray(gallery_images[match.index]),
                roi.height, roi.width);

            if (!unmixed) {
                tex::TextureSynthConfig cfg = synth_config;
                cfg.init_seed = derive_seed(options.seed, rec.image_id, k);
                const tex::SynthesisResult synth =
                    tex::synthesize_texture(roi, bank, cfg);
                work.texture = synth.image;
            }
            rois.push_back(std::move(work));
        }

        for (const std::string& severity : task.severities) {
            img::ImageBuffer candidate = source;
            for (const RoiWork& work : rois) {
                img::ImageBuffer patch;
                if (unmixed) {
                    patch = work.generated;
                } else {
                    const blend::SeverityPreset& preset =
                        preset_by_label(presets, severity);
                    patch = blend::weighted_mix(work.generated, work.texture,
                                                preset.alpha, preset.beta);
                }
                candidate = blend::poisson_blend(candidate, patch, work.box,
                                                 options.poisson);
            }

            const std::string stem = rec.image_id + "_aug_" + severity;
            img::save_image(candidate, out_root / "images" / (stem + ".png"));
            copy_bytes(rec.annotation_path,
                       out_root / "annotations" / (stem + ".xml"));

            AugmentedRecord out_rec;
            out_rec.source_image_id = rec.image_id;
            out_rec.severity = severity;
            for (const RoiWork& work : rois) {
                out_rec.matched_roi_ids.push_back(work.matched_id);
                out_rec.match_scores.push_back(work.score);
            }
            out_rec.output_image = "images/" + stem + ".png";
            out_rec.annotations = rec.annotations;
            output.records.push_back(std::move(out_rec));
        }
    } catch (const std::exception& e) {
        output.records.clear();
        output.skip = SkipRecord{rec.image_id, e.what()};
    }
    return output;
}

}  // namespace

AugmentOutcome augment_dataset(const data::DatasetIndex& index,
                               const gan::GalleryManifest& gallery,
                               const fs::path& gallery_dir,
                               const tex::FeatureBank& bank,
                               const std::vector<blend::SeverityPreset>& presets,
                               const SelectionPolicy& policy,
                               const sim::SsimParams& ssim_params,
                               const tex::TextureSynthConfig& synth_config,
                               const AugmentOptions& options,
                               const fs::path& out_root, bool dry_run) {
    if (gallery.entries.empty())
        throw InputError("augment: gallery is empty: " +
                         gallery_dir.string());
    if (presets.empty() && policy.mode != SelectionMode::kUnmixedOnly)
        throw InputError("augment: preset table is empty");

    // Eligible set: training split only, target class present; index order
    // is already lexicographic by image id.
    std::vector<const data::AnnotatedImage*> eligible;
    for (const data::AnnotatedImage& rec : index.records) {
        if (rec.split != data::Split::kTrain) continue;
        for (const data::Annotation& a : rec.annotations)
            if (a.class_label == options.target_class) {
                eligible.push_back(&rec);
                break;
            }
    }
    if (options.fraction < 1.0) {
        std::vector<const data::AnnotatedImage*> pool = eligible;
        Rng rng(mix64(options.seed ^ 0xF4AC7104ull));
        rng.shuffle(pool);
        const std::size_t keep = static_cast<std::size_t>(std::floor(
            options.fraction * static_cast<double>(pool.size())));
        pool.resize(keep);
        std::sort(pool.begin(), pool.end(),
                  [](const auto* a, const auto* b) {
                      return a->image_id < b->image_id;
                  });
        eligible = std::move(pool);
    }

    AugmentOutcome outcome;
    if (eligible.empty()) return outcome;

    std::vector<std::string> ids;
    for (const auto* rec : eligible) ids.push_back(rec->image_id);
    std::vector<std::string> labels;
    for (const blend::SeverityPreset& p : presets) labels.push_back(p.label);
    outcome.assignment = select_versions(ids, policy, labels);
    if (dry_run) return outcome;

    fs::create_directories(out_root / "images");
    fs::create_directories(out_root / "annotations");

    // The output dataset starts as a byte copy of every training record.
    for (const data::AnnotatedImage& rec : index.records) {
        if (rec.split != data::Split::kTrain) continue;
        copy_bytes(rec.image_path,
                   out_root / "images" / rec.image_path.filename());
        copy_bytes(rec.annotation_path,
                   out_root / "annotations" / rec.annotation_path.filename());
    }

    const std::vector<img::ImageBuffer> gallery_images =
        gan::load_gallery_images(gallery, gallery_dir);

    std::map<std::string, ImageTask> tasks;
    for (const auto& [id, severity] : outcome.assignment)
        tasks[id].severities.push_back(severity);
    for (const auto* rec : eligible)
        if (tasks.count(rec->image_id)) tasks[rec->image_id].record = rec;

    std::vector<const ImageTask*> task_list;
    for (const auto& [id, task] : tasks) task_list.push_back(&task);

    const bool unmixed = policy.mode == SelectionMode::kUnmixedOnly;
    std::vector<ImageOutput> outputs(task_list.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) \
    if (kernels::parallel_enabled() && task_list.size() > 1)
#endif
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(task_list.size());
         ++i) {
        outputs[static_cast<std::size_t>(i)] = process_image(
            *task_list[static_cast<std::size_t>(i)], gallery_images, gallery,
            bank, presets, ssim_params, synth_config, options, out_root,
            unmixed);
    }

    // Assemble in deterministic id order regardless of completion order.
    for (const ImageOutput& output : outputs) {
        for (const AugmentedRecord& rec : output.records)
            outcome.records.push_back(rec);
        if (output.skip) outcome.skips.push_back(*output.skip);
    }
    save_augmentation_manifest(outcome,
                               out_root / "augmentation_manifest.json");
    return outcome;
}

void save_augmentation_manifest(const AugmentOutcome& outcome,
                                const fs::path& path) {
    json j;
    j["records"] = json::array();
    for (const AugmentedRecord& rec : outcome.records) {
        json r;
        r["source_image_id"] = rec.source_image_id;
        r["severity"] = rec.severity;
        r["matched_roi_ids"] = rec.matched_roi_ids;
        r["match_scores"] = rec.match_scores;
        r["output_image"] = rec.output_image;
        r["annotations"] = json::array();
        for (const data::Annotation& a : rec.annotations)
            r["annotations"].push_back({{"label", a.class_label},
                                        {"xmin", a.box.xmin},
                                        {"ymin", a.box.ymin},
                                        {"xmax", a.box.xmax},
                                        {"ymax", a.box.ymax}});
        j["records"].push_back(std::move(r));
    }
    j["skips"] = json::array();
    for (const SkipRecord& s : outcome.skips)
        j["skips"].push_back({{"image_id", s.image_id}, {"reason", s.reason}});
    j["assignment"] = json::array();
    for (const auto& [id, severity] : outcome.assignment)
        j["assignment"].push_back({{"image_id", id}, {"severity", severity}});
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot write augmentation manifest: " +
                         path.string());
    out << j.dump(2) << "\n";
}

void MetricsRecord::validate() const {
    const auto in_unit = [](const std::optional<double>& v) {
        return !v || (*v >= 0.0 && *v <= 1.0);
    };
    if (!in_unit(precision) || !in_unit(recall) || !in_unit(f1) ||
        !in_unit(map))
        throw InputError("metrics for '" + label +
                         "' must lie in [0, 1]");
    if (precision && recall && f1) {
        const double expected =
            2.0 * *precision * *recall / (*precision + *recall);
        if (std::abs(*f1 - expected) > 0.005)
            throw InputError("metrics for '" + label +
                             "' are inconsistent: F1 " + std::to_string(*f1) +
                             " vs 2PR/(P+R) " + std::to_string(expected));
    }
}

double improvement_rate(double f1_origin, double f1_augmented) {
    if (f1_origin <= 0.0)
        throw InputError("improvement_rate: origin F1 must be positive");
    return 100.0 * (f1_augmented - f1_origin) / f1_origin;
}

Report build_report(const std::vector<MetricsRecord>& metrics,
                    const std::string& baseline_label) {
    const MetricsRecord* baseline = nullptr;
    for (const MetricsRecord& m : metrics) {
        m.validate();
        if (m.label == baseline_label) baseline = &m;
    }
    if (!baseline)
        throw InputError("baseline '" + baseline_label +
                         "' not present in metrics");

    Report report;
    report.baseline_label = baseline_label;
    for (const MetricsRecord& m : metrics) {
        ReportRow row;
        row.label = m.label;
        if (m.f1 && baseline->f1) {
            row.f1_delta = *m.f1 - *baseline->f1;
            if (*baseline->f1 > 0.0)
                row.improvement_rate_pct =
                    improvement_rate(*baseline->f1, *m.f1);
        }
        if (m.map && baseline->map) row.map_delta = *m.map - *baseline->map;
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::string report_text(const Report& report) {
    std::ostringstream os;
    os << "baseline: " << report.baseline_label << "\n";
    os << std::left << std::setw(24) << "label" << std::right << std::setw(12)
       << "F1 delta" << std::setw(12) << "mAP delta" << std::setw(12)
       << "rate (%)" << "\n";
    os << std::string(60, '-') << "\n";
    const auto cell = [&](const std::optional<double>& v, int precision) {
        std::ostringstream c;
        if (v)
            c << std::fixed << std::setprecision(precision) << *v;
        else
            c << "-";
        return c.str();
    };
    for (const ReportRow& row : report.rows) {
        os << std::left << std::setw(24) << row.label << std::right
           << std::setw(12) << cell(row.f1_delta, 3) << std::setw(12)
           << cell(row.map_delta, 3) << std::setw(12)
           << cell(row.improvement_rate_pct, 1) << "\n";
    }
    return os.str();
}

void write_report(const Report& report, const fs::path& json_path,
                  const fs::path& text_path) {
    json j;
    j["baseline"] = report.baseline_label;
    j["rows"] = json::array();
    for (const ReportRow& row : report.rows) {
        json r;
        r["label"] = row.label;
        if (row.f1_delta) r["f1_delta"] = *row.f1_delta;
        if (row.map_delta) r["map_delta"] = *row.map_delta;
        if (row.improvement_rate_pct)
            r["improvement_rate_pct"] = *row.improvement_rate_pct;
        j["rows"].push_back(std::move(r));
    }
    std::ofstream out(json_path);
    if (!out)
        throw InputError("cannot write report: " + json_path.string());
    out << j.dump(2) << "\n";

    std::ofstream text(text_path);
    if (!text)
        throw InputError("cannot write report: " + text_path.string());
    text << report_text(report);
}

std::vector<MetricsRecord> load_metrics(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read metrics file: " + path.string());
    json j;
    try {
        in >> j;
        std::vector<MetricsRecord> out;
        for (const json& m : j) {
            MetricsRecord rec;
            rec.label = m.at("label").get<std::string>();
            if (m.contains("precision"))
                rec.precision = m.at("precision").get<double>();
            if (m.contains("recall")) rec.recall = m.at("recall").get<double>();
            if (m.contains("f1")) rec.f1 = m.at("f1").get<double>();
            if (m.contains("map")) rec.map = m.at("map").get<double>();
            rec.validate();
            out.push_back(std::move(rec));
        }
        return out;
    } catch (const json::exception& e) {
        throw InputError("malformed metrics file " + path.string() + ": " +
                         e.what());
    }
}

}  // namespace roadaug::pipe
