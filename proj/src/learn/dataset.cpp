#include "pem/learn/dataset.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include <json.hpp>

namespace pem::learn {

using nlohmann::json;

std::size_t PerceptionDataset::frame_count() const {
  std::size_t n = 0;
  for (const auto& s : scenes) n += s.frames.size();
  return n;
}

namespace {

double coord(const json& obj, const char* key) {
  if (!obj.contains(key) || !obj.at(key).is_number()) {
    throw DatasetError(std::string("missing numeric field '") + key + "'");
  }
  return obj.at(key).get<double>();
}

std::string scene_key(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  throw DatasetError("'scene' must be a string or an integer");
}

DatasetFrame parse_frame(const json& j) {
  DatasetFrame frame;
  frame.t = coord(j, "t");
  if (!j.contains("gt") || !j.at("gt").is_array()) throw DatasetError("missing array 'gt'");
  if (!j.contains("det") || !j.at("det").is_array()) throw DatasetError("missing array 'det'");
  for (const json& g : j.at("gt")) {
    if (!g.contains("id") || !g.at("id").is_number_integer()) {
      throw DatasetError("gt entry needs an integer 'id'");
    }
    if (!g.contains("occ") || !g.at("occ").is_number_integer()) {
      throw DatasetError("gt entry needs an integer 'occ'");
    }
    const auto occ = occlusion_from_index(g.at("occ").get<int>());
    if (!occ) throw DatasetError("'occ' must be in 0..3");
    frame.ground_truth.push_back(
        {g.at("id").get<ObjectId>(), to_polar({coord(g, "x"), coord(g, "y")}), *occ});
  }
  for (const json& d : j.at("det")) frame.detections.push_back(to_polar({coord(d, "x"), coord(d, "y")}));
  return frame;
}

}  // namespace

PerceptionDataset read_dataset_jsonl(std::istream& in, double frame_rate_hz) {
  PerceptionDataset dataset;
  dataset.frame_rate_hz = frame_rate_hz;
  std::map<std::string, std::size_t> scene_index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      if (!j.is_object() || !j.contains("scene")) throw DatasetError("missing field 'scene'");
      const std::string key = scene_key(j.at("scene"));
      DatasetFrame frame = parse_frame(j);
      auto [it, inserted] = scene_index.try_emplace(key, dataset.scenes.size());
      if (inserted) dataset.scenes.push_back({key, {}});
      Scene& scene = dataset.scenes[it->second];
      if (!scene.frames.empty() && !(frame.t > scene.frames.back().t)) {
        throw DatasetError("frame times must increase within scene " + key);
      }
      scene.frames.push_back(std::move(frame));
    } catch (const json::exception& e) {
      throw DatasetError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DatasetError& e) {
      throw DatasetError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return dataset;
}

PerceptionDataset load_dataset_jsonl(const std::filesystem::path& path, double frame_rate_hz) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read dataset file " + path.string());
  return read_dataset_jsonl(in, frame_rate_hz);
}

void write_dataset_jsonl(const PerceptionDataset& dataset, std::ostream& out) {
  for (const Scene& scene : dataset.scenes) {
    for (const DatasetFrame& frame : scene.frames) {
      json gt = json::array();
      for (const auto& g : frame.ground_truth) {
        const EgoPoint p = to_cartesian(g.position);
        gt.push_back({{"id", g.id}, {"x", p.x}, {"y", p.y}, {"occ", static_cast<int>(g.occlusion)}});
      }
      json det = json::array();
      for (const auto& d : frame.detections) {
        const EgoPoint p = to_cartesian(d);
        det.push_back({{"x", p.x}, {"y", p.y}});
      }
      const json line = {{"scene", scene.id}, {"t", frame.t}, {"gt", std::move(gt)}, {"det", std::move(det)}};
      out << line.dump() << '\n';
    }
  }
}

void save_dataset_jsonl(const PerceptionDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset file " + path.string());
  write_dataset_jsonl(dataset, out);
}

}  // namespace pem::learn
