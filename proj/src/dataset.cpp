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

#include "roadaug/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <nlohmann/json.hpp>

#include "roadaug/image_io.hpp"
#include "roadaug/rng.hpp"

namespace roadaug::data {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;
using nlohmann::json;

std::size_t DatasetIndex::count(Split s) const {
    std::size_t n = 0;
    for (const auto& r : records)
        if (r.split == s) ++n;
    return n;
}

namespace {

bool is_image_file(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<Annotation> parse_voc(const fs::path& xml_path) {
    pt::ptree tree;
    try {
        pt::read_xml(xml_path.string(), tree);
    } catch (const pt::xml_parser_error& e) {
        throw InputError("malformed annotation file " + xml_path.string() +
                         ": " + e.message());
    }

    std::vector<Annotation> out;
    try {
        const pt::ptree& root = tree.get_child("annotation");
        for (const auto& [key, obj] : root) {
            if (key != "object") continue;
            Annotation a;
            a.class_label = obj.get<std::string>("name");
            a.box.xmin = obj.get<int>("bndbox.xmin");
            a.box.ymin = obj.get<int>("bndbox.ymin");
            a.box.xmax = obj.get<int>("bndbox.xmax");
            a.box.ymax = obj.get<int>("bndbox.ymax");
            if (a.class_label.empty())
                throw InputError("empty class label in " + xml_path.string());
            out.push_back(std::move(a));
        }
    } catch (const pt::ptree_error& e) {
        throw InputError("malformed annotation file " + xml_path.string() +
                         ": " + e.what());
    }
    return out;
}

// Public road datasets contain off-by-one boxes; clamp and warn instead of
// rejecting so record counts stay faithful.
void clamp_boxes(AnnotatedImage& rec, std::size_t width, std::size_t height) {
    for (Annotation& a : rec.annotations) {
        img::Box2D fixed = a.box;
        fixed.xmin = std::clamp(fixed.xmin, 0, static_cast<int>(width) - 1);
        fixed.ymin = std::clamp(fixed.ymin, 0, static_cast<int>(height) - 1);
        fixed.xmax = std::clamp(fixed.xmax, fixed.xmin + 1,
                                static_cast<int>(width));
        fixed.ymax = std::clamp(fixed.ymax, fixed.ymin + 1,
                                static_cast<int>(height));
        if (!(fixed == a.box)) {
            std::cerr << "warning: clamped box for " << rec.image_id
                      << " from [" << a.box.xmin << "," << a.box.ymin << ","
                      << a.box.xmax << "," << a.box.ymax << ")\n";
            a.box = fixed;
        }
    }
}

}  // namespace

DatasetIndex ingest(const fs::path& root) {
    const fs::path images_dir = root / "images";
    const fs::path ann_dir = root / "annotations";
    if (!fs::is_directory(images_dir))
        throw InputError("dataset root missing images directory: " +
                         images_dir.string());
    if (!fs::is_directory(ann_dir))
        throw InputError("dataset root missing annotations directory: " +
                         ann_dir.string());

    std::map<std::string, fs::path> image_by_stem;
    for (const auto& entry : fs::directory_iterator(images_dir)) {
        if (!entry.is_regular_file() || !is_image_file(entry.path())) continue;
        // Duplicate stems (a.png next to a.jpg) resolve to the
        // lexicographically smaller path, not directory order.
        auto [it, inserted] =
            image_by_stem.emplace(entry.path().stem().string(), entry.path());
        if (!inserted && entry.path().string() < it->second.string())
            it->second = entry.path();
    }

    DatasetIndex index;
    std::vector<fs::path> xml_files;
    for (const auto& entry : fs::directory_iterator(ann_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".xml")
            xml_files.push_back(entry.path());
    std::sort(xml_files.begin(), xml_files.end());

    for (const fs::path& xml : xml_files) {
        AnnotatedImage rec;
        rec.image_id = xml.stem().string();
        rec.annotation_path = xml;
        const auto it = image_by_stem.find(rec.image_id);
        if (it == image_by_stem.end())
            throw InputError("annotation references missing image: " +
                             rec.image_id);
        rec.image_path = it->second;
        rec.annotations = parse_voc(xml);
        // Dimensions are needed to validate boxes; decode once here.
        const img::ImageBuffer im = img::load_image(rec.image_path);
        clamp_boxes(rec, im.width, im.height);
        index.records.push_back(std::move(rec));
    }
    // directory_iterator order is unspecified; the sort above plus the map
    // already give lexicographic-by-id records.
    return index;
}

void split(DatasetIndex& index, double train_fraction, std::uint64_t seed) {
    if (index.records.empty())
        throw ContractError("split: dataset has no records");
    if (train_fraction <= 0.0 || train_fraction >= 1.0)
        throw ContractError("split: train fraction must lie in (0, 1)");

    const std::size_t n = index.records.size();
    const std::size_t n_train = static_cast<std::size_t>(
        std::floor(train_fraction * static_cast<double>(n)));
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);
    for (std::size_t i = 0; i < n; ++i)
        index.records[order[i]].split =
            i < n_train ? Split::kTrain : Split::kValidation;
    index.train_fraction = train_fraction;
    index.split_seed = seed;
}

std::vector<RoiRecord> extract_rois(const DatasetIndex& index,
                                    const std::string& class_label,
                                    SubsetFilter subset) {
    if (class_label.empty())
        throw ContractError("extract_rois: class label must be non-empty");
    std::vector<RoiRecord> out;
    for (const AnnotatedImage& rec : index.records) {
        if (subset == SubsetFilter::kTrain && rec.split != Split::kTrain)
            continue;
        if (subset == SubsetFilter::kValidation &&
            rec.split != Split::kValidation)
            continue;
        bool has_match = false;
        for (const Annotation& a : rec.annotations)
            has_match = has_match || a.class_label == class_label;
        if (!has_match) continue;

        const img::ImageBuffer im = img::load_image(rec.image_path);
        for (std::size_t k = 0; k < rec.annotations.size(); ++k) {
            const Annotation& a = rec.annotations[k];
            if (a.class_label != class_label) continue;
            RoiRecord roi;
            roi.image_id = rec.image_id;
            roi.annotation_index = k;
            roi.box = a.box;
            try {
                roi.roi = img::crop(im, a.box);
            } catch (const ContractError& e) {
                throw InputError("bad box in annotation " + std::to_string(k) +
                                 " of " + rec.image_id + ": " + e.what());
            }
            out.push_back(std::move(roi));
        }
    }
    return out;
}

namespace {

const char* split_name(std::optional<Split> s) {
    if (!s) return "unassigned";
    return *s == Split::kTrain ? "train" : "validation";
}

std::optional<Split> split_from_name(const std::string& s) {
    if (s == "train") return Split::kTrain;
    if (s == "validation") return Split::kValidation;
    if (s == "unassigned") return std::nullopt;
    throw InputError("unknown split name in index: " + s);
}

}  // namespace

void save_index(const DatasetIndex& index, const fs::path& path) {
    json j;
    j["train_fraction"] = index.train_fraction;
    j["split_seed"] = index.split_seed;
    j["records"] = json::array();
    for (const AnnotatedImage& rec : index.records) {
        json r;
        r["image_id"] = rec.image_id;
        r["image_path"] = rec.image_path.string();
        r["annotation_path"] = rec.annotation_path.string();
        r["split"] = split_name(rec.split);
        r["annotations"] = json::array();
        for (const Annotation& a : rec.annotations)
            r["annotations"].push_back({{"label", a.class_label},
                                        {"xmin", a.box.xmin},
                                        {"ymin", a.box.ymin},
                                        {"xmax", a.box.xmax},
                                        {"ymax", a.box.ymax}});
        j["records"].push_back(std::move(r));
    }
    std::ofstream out(path);
    if (!out) throw InputError("cannot write index file: " + path.string());
    out << j.dump(2) << "\n";
}

DatasetIndex load_index(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read index file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("malformed index file " + path.string() + ": " +
                         e.what());
    }
    DatasetIndex index;
    try {
        index.train_fraction = j.value("train_fraction", 0.0);
        index.split_seed = j.value("split_seed", std::uint64_t{0});
        for (const json& r : j.at("records")) {
            AnnotatedImage rec;
            rec.image_id = r.at("image_id").get<std::string>();
            rec.image_path = r.at("image_path").get<std::string>();
            rec.annotation_path = r.at("annotation_path").get<std::string>();
            rec.split = split_from_name(r.at("split").get<std::string>());
            for (const json& a : r.at("annotations")) {
                Annotation ann;
                ann.class_label = a.at("label").get<std::string>();
                ann.box.xmin = a.at("xmin").get<int>();
                ann.box.ymin = a.at("ymin").get<int>();
                ann.box.xmax = a.at("xmax").get<int>();
                ann.box.ymax = a.at("ymax").get<int>();
                rec.annotations.push_back(std::move(ann));
            }
            index.records.push_back(std::move(rec));
        }
    } catch (const json::exception& e) {
        throw InputError("malformed index file " + path.string() + ": " +
                         e.what());
    }
    return index;
}

}  // namespace roadaug::data
