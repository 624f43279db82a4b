#include "pem/server/session.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

#include <json.hpp>

namespace pem::server {

using ojson = nlohmann::ordered_json;
using nlohmann::json;

namespace {

struct Rejection {
  std::string_view code;
  std::string message;
};

std::string ack_line(std::string_view of) {
  ojson out;
  out["type"] = "ack";
  out["of"] = of;
  return out.dump();
}

double finite_number(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) throw Rejection{kBadRequest, std::string("missing number '") + key + "'"};
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw Rejection{kBadRequest, std::string("'") + key + "' is not finite"};
  return v;
}

std::vector<CartesianObject> parse_objects(const json& request) {
  const auto it = request.find("objects");
  if (it == request.end() || !it->is_array()) throw Rejection{kBadRequest, "missing array 'objects'"};
  std::vector<CartesianObject> objects;
  objects.reserve(it->size());
  for (const auto& o : *it) {
    if (!o.is_object()) throw Rejection{kBadRequest, "object entries must be JSON objects"};
    const auto id = o.find("id");
    if (id == o.end() || !id->is_number_integer() ||
        (id->is_number_unsigned() && id->get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))) {
      throw Rejection{kBadRequest, "object 'id' must be a 64-bit integer"};
    }
    const auto occ = o.find("occ");
    if (occ == o.end() || !occ->is_number_integer()) throw Rejection{kBadRequest, "object 'occ' must be an integer"};
    const auto raw_occ = occ->get<std::int64_t>();
    const auto level = raw_occ >= 0 && raw_occ < kOcclusionLevels ? occlusion_from_index(static_cast<int>(raw_occ))
                                                                  : std::nullopt;
    if (!level) throw Rejection{kBadRequest, "object 'occ' must be in 0..3"};
    objects.push_back({id->get<ObjectId>(), {finite_number(o, "x"), finite_number(o, "y")}, *level});
  }
  return objects;
}

}  // namespace

std::string error_line(std::string_view code, std::string_view message) {
  ojson out;
  out["type"] = "error";
  out["code"] = code;
  out["message"] = message;
  return out.dump();
}

std::string Session::handle_line(std::string_view line) {
  json request;
  try {
    request = json::parse(line);
  } catch (const json::parse_error&) {
    return error_line(kMalformed, "request is not valid JSON");
  }

  try {
    if (!request.is_object()) throw Rejection{kBadRequest, "request must be a JSON object"};
    const auto type_it = request.find("type");
    if (type_it == request.end() || !type_it->is_string()) throw Rejection{kBadRequest, "missing string 'type'"};
    const std::string type = type_it->get<std::string>();

    if (type == "init") {
      if (model_) throw Rejection{kAlreadyInitialized, "session is already initialized"};
      const auto name = request.find("model");
      if (name == request.end() || !name->is_string()) throw Rejection{kBadRequest, "missing string 'model'"};
      const auto seed = request.find("seed");
      if (seed == request.end() || !seed->is_number_unsigned()) {
        throw Rejection{kBadRequest, "'seed' must be a non-negative integer"};
      }
      double rate = 0.0;
      if (request.contains("rate_hz")) {
        rate = finite_number(request, "rate_hz");
        if (!(rate > 0.0)) throw Rejection{kBadRequest, "'rate_hz' must be positive"};
      }
      const auto found = registry_->find(name->get<std::string>());
      if (found == registry_->end()) throw Rejection{kUnknownModel, "unknown model '" + name->get<std::string>() + "'"};
      model_ = &found->second;
      model_name_ = found->first;
      seed_ = seed->get<std::uint64_t>();
      rate_hz_ = rate;
      resets_ = 0;
      rng_ = Rng(session_seed(seed_, resets_));
      return ack_line("init");
    }

    if (type == "frame") {
      if (!model_) throw Rejection{kNotInitialized, "frame before init"};
      const double t = finite_number(request, "t");
      const std::vector<CartesianObject> objects = parse_objects(request);
      if (last_t_ && !(t > *last_t_)) throw Rejection{kTimeRegression, "frame time must increase"};
      std::vector<GroundTruthObject> check;
      check.reserve(objects.size());
      for (const auto& o : objects) check.push_back({o.id, {}, o.occlusion});
      try {
        require_unique_ids(check);
      } catch (const DuplicateIdError& e) {
        throw Rejection{kDuplicateId, e.what()};
      }

      const std::vector<CartesianDetection> perceived = perceive(*model_, objects, tracks_, rng_);
      last_t_ = t;
      ++frames_;
      ojson out;
      out["type"] = "response";
      out["t"] = t;
      out["objects"] = ojson::array();
      for (const auto& p : perceived) {
        ojson o;
        o["source_id"] = p.source_id;
        o["x"] = p.position.x;
        o["y"] = p.position.y;
        out["objects"].push_back(std::move(o));
      }
      return out.dump();
    }

    if (type == "reset") {
      if (model_) {
        ++resets_;
        rng_ = Rng(session_seed(seed_, resets_));
        tracks_.clear();
        frames_ = 0;
        last_t_.reset();
      }
      return ack_line("reset");
    }

    if (type == "shutdown") {
      shutdown_ = true;
      return ack_line("shutdown");
    }

    throw Rejection{kBadRequest, "unknown request type '" + type + "'"};
  } catch (const Rejection& r) {
    return error_line(r.code, r.message);
  }
}

}  // namespace pem::server
