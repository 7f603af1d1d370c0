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

#ifndef ROADAUG_DATASET_HPP
#define ROADAUG_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "roadaug/image.hpp"

namespace roadaug::data {

struct Annotation {
    std::string class_label;
    img::Box2D box;
};

enum class Split { kTrain, kValidation };

struct AnnotatedImage {
    std::string image_id;  // file stem, unique within a dataset
    std::filesystem::path image_path;
    std::filesystem::path annotation_path;
    std::vector<Annotation> annotations;
    std::optional<Split> split;
};

/// Ordered, immutable once built. Records are sorted lexicographically by
/// image_id so ingestion is deterministic regardless of directory order.
struct DatasetIndex {
    std::vector<AnnotatedImage> records;
    double train_fraction = 0.0;   // recorded by split()
    std::uint64_t split_seed = 0;

    std::size_t count(Split s) const;
};

/// Reads `<root>/images/*.png|jpg` and `<root>/annotations/*.xml`
/// (Pascal-VOC bndbox convention), one XML per image matched by stem.
/// Boxes are clamped to the image bounds with a warning on stderr rather
/// than rejected. An annotation whose image is missing raises InputError
/// naming the id; a malformed XML names the file.
DatasetIndex ingest(const std::filesystem::path& root);

/// Seeded-random assignment; train size is floor(train_fraction * N).
void split(DatasetIndex& index, double train_fraction, std::uint64_t seed);

struct RoiRecord {
    std::string image_id;
    std::size_t annotation_index = 0;
    img::Box2D box;
    img::ImageBuffer roi;
};

enum class SubsetFilter { kTrain, kValidation, kAll };

/// One entry per matching annotation, ordered by (image_id, annotation
/// index). No dedup, no merging.
std::vector<RoiRecord> extract_rois(const DatasetIndex& index,
                                    const std::string& class_label,
                                    SubsetFilter subset);

/// Canonical JSON manifest (image_id, path, split, annotations).
void save_index(const DatasetIndex& index, const std::filesystem::path& path);
DatasetIndex load_index(const std::filesystem::path& path);

}  // namespace roadaug::data

#endif  // ROADAUG_DATASET_HPP
