#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "pem/core/types.hpp"

namespace pem::learn {

struct DatasetFrame {
  double t = 0.0;
  std::vector<GroundTruthObject> ground_truth;
  std::vector<PolarCoord> detections;
};

/// Frames are ordered by strictly increasing t; ids are stable within a scene.
struct Scene {
  std::string id;
  std::vector<DatasetFrame> frames;
};

struct PerceptionDataset {
  std::vector<Scene> scenes;
  double frame_rate_hz = 2.0;

  std::size_t frame_count() const;
};

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// JSON-lines, one frame per line, ego-relative Cartesian meters:
//   {"scene": 3, "t": 0.5, "gt": [{"id", "x", "y", "occ"}], "det": [{"x", "y"}]}
// Scenes keep first-appearance order. Throws DatasetError with the line number.
PerceptionDataset read_dataset_jsonl(std::istream& in, double frame_rate_hz = 2.0);
PerceptionDataset load_dataset_jsonl(const std::filesystem::path& path, double frame_rate_hz = 2.0);

void write_dataset_jsonl(const PerceptionDataset& dataset, std::ostream& out);
void save_dataset_jsonl(const PerceptionDataset& dataset, const std::filesystem::path& path);

}  // namespace pem::learn
