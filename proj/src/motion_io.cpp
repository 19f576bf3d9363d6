#include <sstream>

#include <json.hpp>

#include "arflow/data.hpp"
#include "arflow/error.hpp"
#include "arflow/fileio.hpp"

namespace arflow {

using Json = nlohmann::ordered_json;

namespace {

Json skeleton_json(const Skeleton& skel) {
  Json offsets = Json::array();
  for (const auto& o : skel.bone_offset) offsets.push_back({o.x(), o.y(), o.z()});
  return Json{{"parents", skel.parent}, {"offsets", offsets}, {"radii", skel.capsule_radius}};
}

Json person_json(const MotionTensor& motion, const Skeleton& skel) {
  const MotionLayout layout{skel.joint_count()};
  Json frames = Json::array();
  for (Eigen::Index h = 0; h < motion.rows(); ++h) {
    Json rot = Json::array();
    for (int j = 0; j < layout.joints; ++j) {
      Json r = Json::array();
      for (int i = 0; i < 6; ++i) r.push_back(motion(h, layout.joint_rot(j) + i));
      rot.push_back(std::move(r));
    }
    Json root = Json::array();
    for (int i = 0; i < 6; ++i) root.push_back(motion(h, layout.root_rot() + i));
    Json trans = Json::array();
    for (int i = 0; i < 3; ++i) trans.push_back(motion(h, layout.root_trans() + i));
    frames.push_back(Json{{"rot6d", std::move(rot)}, {"root_rot6d", std::move(root)}, {"trans", std::move(trans)}});
  }
  return Json{{"skeleton", skeleton_json(skel)}, {"frames", std::move(frames)}};
}

[[noreturn]] void schema_fail(int line, const std::string& what) {
  throw Error(ErrorCode::kSchemaError, "record at line " + std::to_string(line) + ": " + what);
}

const Json& field(const Json& obj, const char* key, int line) {
  if (!obj.is_object()) schema_fail(line, std::string("expected an object holding '") + key + "'");
  const auto it = obj.find(key);
  if (it == obj.end()) schema_fail(line, std::string("missing field '") + key + "'");
  return *it;
}

double number(const Json& v, int line, const char* what) {
  if (!v.is_number()) schema_fail(line, std::string(what) + " must be a number");
  return v.get<double>();
}

void fill_numbers(const Json& arr, std::size_t n, double* out, int line, const char* what) {
  if (!arr.is_array() || arr.size() != n) {
    schema_fail(line, std::string(what) + " must be an array of " + std::to_string(n) + " numbers");
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = number(arr[i], line, what);
}

Skeleton parse_skeleton(const Json& j, int line) {
  Skeleton s;
  const Json& parents = field(j, "parents", line);
  const Json& offsets = field(j, "offsets", line);
  const Json& radii = field(j, "radii", line);
  if (!parents.is_array() || !offsets.is_array() || !radii.is_array() || parents.size() != offsets.size() ||
      parents.size() != radii.size() || parents.empty()) {
    schema_fail(line, "skeleton arrays must be non-empty and equally long");
  }
  for (std::size_t i = 0; i < parents.size(); ++i) {
    if (!parents[i].is_number_integer()) schema_fail(line, "parents must be integers");
    s.parent.push_back(parents[i].get<int>());
    Eigen::Vector3d o;
    fill_numbers(offsets[i], 3, o.data(), line, "offset");
    s.bone_offset.push_back(o);
    s.capsule_radius.push_back(number(radii[i], line, "radius"));
  }
  try {
    s.validate();
  } catch (const Error& e) {
    schema_fail(line, e.what());
  }
  return s;
}

MotionTensor parse_person(const Json& j, const Skeleton& expected, int line) {
  const Skeleton skel = parse_skeleton(field(j, "skeleton", line), line);
  if (!(skel == expected)) schema_fail(line, "skeleton differs from the file's first record");
  const Json& frames = field(j, "frames", line);
  if (!frames.is_array() || frames.empty()) schema_fail(line, "frames must be a non-empty array");
  const MotionLayout layout{skel.joint_count()};
  MotionTensor m(static_cast<Eigen::Index>(frames.size()), layout.frame_dim());
  for (std::size_t h = 0; h < frames.size(); ++h) {
    Eigen::RowVectorXd row(layout.frame_dim());
    const Json& rot = field(frames[h], "rot6d", line);
    if (!rot.is_array() || static_cast<int>(rot.size()) != layout.joints) {
      schema_fail(line, "rot6d must hold one 6-vector per joint");
    }
    for (int jt = 0; jt < layout.joints; ++jt) {
      fill_numbers(rot[jt], 6, row.data() + layout.joint_rot(jt), line, "rot6d entry");
    }
    fill_numbers(field(frames[h], "root_rot6d", line), 6, row.data() + layout.root_rot(), line, "root_rot6d");
    fill_numbers(field(frames[h], "trans", line), 3, row.data() + layout.root_trans(), line, "trans");
    m.row(static_cast<Eigen::Index>(h)) = row;
  }
  return m;
}

}  // namespace

std::string serialize_motions(const MotionFile& file) {
  std::string out;
  for (const auto& s : file.samples) {
    check_motion(s.actor, file.skeleton);
    check_motion(s.reactor, file.skeleton);
    Json rec{{"version", kMotionFormatVersion},
             {"fps", file.fps},
             {"label", s.label},
             {"seed", s.seed_used},
             {"actor", person_json(s.actor, file.skeleton)},
             {"reactor", person_json(s.reactor, file.skeleton)}};
    out += rec.dump();
    out += '\n';
  }
  return out;
}

void save_motions(const std::string& path, const MotionFile& file) {
  write_file_atomic(path, serialize_motions(file));
}

MotionFile parse_motions(const std::string& text) {
  MotionFile out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Json rec;
    try {
      rec = Json::parse(line);
    } catch (const Json::exception& e) {
      schema_fail(line_no, std::string("malformed JSON: ") + e.what());
    }
    const Json& version = field(rec, "version", line_no);
    if (!version.is_number_integer() || version.get<int>() != kMotionFormatVersion) {
      schema_fail(line_no, "unsupported version");
    }
    const double fps = number(field(rec, "fps", line_no), line_no, "fps");
    const Json& label = field(rec, "label", line_no);
    const Json& seed = field(rec, "seed", line_no);
    if (!label.is_number_integer() || label.get<long long>() < 0) schema_fail(line_no, "label must be an integer >= 0");
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
      schema_fail(line_no, "seed must be a non-negative integer");
    }
    if (first) {
      out.skeleton = parse_skeleton(field(field(rec, "actor", line_no), "skeleton", line_no), line_no);
      out.fps = fps;
      first = false;
    } else if (fps != out.fps) {
      schema_fail(line_no, "fps differs from the file's first record");
    }
    InteractionSample s;
    s.label = label.get<int>();
    s.seed_used = seed.get<std::uint64_t>();
    s.actor = parse_person(field(rec, "actor", line_no), out.skeleton, line_no);
    s.reactor = parse_person(field(rec, "reactor", line_no), out.skeleton, line_no);
    if (s.actor.rows() != s.reactor.rows()) schema_fail(line_no, "actor and reactor frame counts differ");
    out.samples.push_back(std::move(s));
  }
  return out;
}

MotionFile load_motions(const std::string& path) { return parse_motions(read_file(path)); }

}  // namespace arflow
