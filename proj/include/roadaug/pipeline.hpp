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

#ifndef ROADAUG_PIPELINE_HPP
#define ROADAUG_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "roadaug/blend.hpp"
#include "roadaug/dataset.hpp"
#include "roadaug/gan.hpp"
#include "roadaug/ssim.hpp"
#include "roadaug/texture.hpp"

namespace roadaug::pipe {

enum class SelectionMode {
    kUnmixedOnly,        // embed the matched generated ROI directly
    kSingleSeverity,     // one named severity for every image
    kAllThree,           // every severity for every image
    kRandomOneToOneToOne  // stratified random, exact 1:1:1 up to remainder
};

struct SelectionPolicy {
    SelectionMode mode = SelectionMode::kRandomOneToOneToOne;
    std::string severity_label;  // for kSingleSeverity
    std::uint64_t seed = 0;
};

SelectionMode selection_mode_from_name(const std::string& name);
std::string selection_mode_name(SelectionMode mode);

/// Assignment of severity versions to eligible images. Random mode
/// shuffles the ids and the severity order with the policy seed, then
/// assigns round-robin: counts are exact up to remainder and each id's
/// marginal distribution is uniform over severities.
std::vector<std::pair<std::string, std::string>> select_versions(
    const std::vector<std::string>& eligible_ids,
    const SelectionPolicy& policy,
    const std::vector<std::string>& severity_labels);

struct AugmentedRecord {
    std::string source_image_id;
    std::string severity;
    std::vector<std::string> matched_roi_ids;  // one per target-class box
    std::vector<double> match_scores;
    std::string output_image;  // path relative to the output root
    std::vector<data::Annotation> annotations;  // identical to the source's
};

struct SkipRecord {
    std::string image_id;
    std::string reason;
};

struct AugmentOptions {
    std::string target_class = "D40";
    double fraction = 1.0;  // seeded subset of eligible images
    blend::PoissonOptions poisson;
    std::uint64_t seed = 0;  // per-ROI texture seeds derive from this
};

struct AugmentOutcome {
    std::vector<AugmentedRecord> records;
    std::vector<SkipRecord> skips;
    std::vector<std::pair<std::string, std::string>> assignment;
};

/// Steps 3-6 end to end: per training image with target-class boxes, match
/// each ROI against the gallery, synthesize its road texture, mix at the
/// preset weights, embed with Poisson blending, and let the policy pick
/// which severity versions join the output. Writes
///   <out>/images/*.png, <out>/annotations/*.xml (byte copies for
///   originals and augmented stems), <out>/augmentation_manifest.json.
/// Per-image failures are recorded in `skips`, never abort the batch.
/// With dry_run the assignment is computed and returned, nothing written.
AugmentOutcome augment_dataset(const data::DatasetIndex& index,
                               const gan::GalleryManifest& gallery,
                               const std::filesystem::path& gallery_dir,
                               const tex::FeatureBank& bank,
                               const std::vector<blend::SeverityPreset>& presets,
                               const SelectionPolicy& policy,
                               const sim::SsimParams& ssim_params,
                               const tex::TextureSynthConfig& synth_config,
                               const AugmentOptions& options,
                               const std::filesystem::path& out_root,
                               bool dry_run = false);

void save_augmentation_manifest(const AugmentOutcome& outcome,
                                const std::filesystem::path& path);

// ---- evaluation arithmetic -------------------------------------------------

struct MetricsRecord {
    std::string label;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
    std::optional<double> map;

    /// |f1 - 2PR/(P+R)| <= 0.005 when precision, recall and f1 are all
    /// present (published tables round to three digits).
    void validate() const;
};

/// Relative F1 change in percent: 100 * (aug - origin) / origin.
double improvement_rate(double f1_origin, double f1_augmented);

struct ReportRow {
    std::string label;
    std::optional<double> f1_delta;
    std::optional<double> map_delta;
    std::optional<double> improvement_rate_pct;
};

struct Report {
    std::string baseline_label;
    std::vector<ReportRow> rows;
};

Report build_report(const std::vector<MetricsRecord>& metrics,
                    const std::string& baseline_label);

std::string report_text(const Report& report);
void write_report(const Report& report, const std::filesystem::path& json_path,
                  const std::filesystem::path& text_path);

std::vector<MetricsRecord> load_metrics(const std::filesystem::path& path);

}  // namespace roadaug::pipe

#endif  // ROADAUG_PIPELINE_HPP
