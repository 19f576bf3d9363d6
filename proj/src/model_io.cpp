#include "arflow/model_io.hpp"

#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include "arflow/error.hpp"
#include "arflow/fileio.hpp"

namespace arflow {

namespace {

constexpr const char* kMagic = "arflow-predictor";
constexpr int kVersion = 1;

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::istringstream next(const char* expecting) {
    std::string line;
    if (!std::getline(in_, line)) fail(std::string("unexpected end of file, expected ") + expecting);
    ++line_no_;
    return std::istringstream(line);
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kSchemaError, "model line " + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

double parse_double(const std::string& token, const LineReader& reader) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (token.empty() || end != token.c_str() + token.size()) reader.fail("bad number '" + token + "'");
  return v;
}

}  // namespace

void write_predictor(std::ostream& out, const PredictorParams& params) {
  const PredictorConfig& c = params.config;
  out << kMagic << ' ' << kVersion << '\n';
  out << "layers " << c.layers << '\n';
  out << "width " << c.width << '\n';
  out << "heads " << c.heads << '\n';
  out << "ffn_width " << c.ffn_width << '\n';
  out << "causal " << (c.causal ? 1 : 0) << '\n';
  out << "cond_vocab " << c.cond_vocab << '\n';
  out << "prediction_mode " << prediction_mode_name(c.prediction_mode) << '\n';
  out << "frame_dim " << c.frame_dim << '\n';
  out << "max_frames " << c.max_frames << '\n';
  out << "time_scale " << format_double(c.time_scale) << '\n';
  out << "arrays " << params.tensors.size() << '\n';
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    const Eigen::MatrixXd& m = params.tensors.value(i);
    out << "array " << params.tensors.name(i) << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index col = 0; col < m.cols(); ++col) {
        if (col) out << ' ';
        out << format_double(m(r, col));
      }
      out << '\n';
    }
  }
  out << "end\n";
}

std::string predictor_to_string(const PredictorParams& params) {
  std::ostringstream ss;
  write_predictor(ss, params);
  return ss.str();
}

PredictorParams read_predictor(std::istream& in) {
  LineReader reader(in);
  {
    auto header = reader.next("header");
    std::string magic;
    int version = 0;
    if (!(header >> magic >> version) || magic != kMagic) reader.fail("not an arflow predictor file");
    if (version != kVersion) reader.fail("unsupported version " + std::to_string(version));
  }
  std::map<std::string, std::string> fields;
  for (const char* key : {"layers", "width", "heads", "ffn_width", "causal", "cond_vocab", "prediction_mode",
                          "frame_dim", "max_frames", "time_scale"}) {
    auto line = reader.next(key);
    std::string k;
    std::string v;
    if (!(line >> k >> v) || k != key) reader.fail(std::string("expected field '") + key + "'");
    fields[k] = v;
  }
  PredictorParams p;
  PredictorConfig& c = p.config;
  try {
    c.layers = std::stoi(fields["layers"]);
    c.width = std::stoi(fields["width"]);
    c.heads = std::stoi(fields["heads"]);
    c.ffn_width = std::stoi(fields["ffn_width"]);
    c.causal = std::stoi(fields["causal"]) != 0;
    c.cond_vocab = std::stoi(fields["cond_vocab"]);
    c.prediction_mode = parse_prediction_mode(fields["prediction_mode"]);
    c.frame_dim = std::stoi(fields["frame_dim"]);
    c.max_frames = std::stoi(fields["max_frames"]);
  } catch (const std::exception& e) {
    reader.fail(std::string("bad config value: ") + e.what());
  }
  c.time_scale = parse_double(fields["time_scale"], reader);
  try {
    c.validate();
  } catch (const Error& e) {
    reader.fail(e.what());
  }

  std::size_t count = 0;
  {
    auto line = reader.next("arrays");
    std::string k;
    if (!(line >> k >> count) || k != "arrays") reader.fail("expected 'arrays <count>'");
  }
  for (std::size_t i = 0; i < count; ++i) {
    auto line = reader.next("array header");
    std::string k;
    std::string name;
    long rows = 0;
    long cols = 0;
    if (!(line >> k >> name >> rows >> cols) || k != "array" || rows < 0 || cols < 0) {
      reader.fail("expected 'array <name> <rows> <cols>'");
    }
    Eigen::MatrixXd m(rows, cols);
    for (long r = 0; r < rows; ++r) {
      auto values = reader.next("array row");
      std::string token;
      for (long col = 0; col < cols; ++col) {
        if (!(values >> token)) reader.fail("array " + name + " row " + std::to_string(r) + " is short");
        m(r, col) = parse_double(token, reader);
      }
      if (values >> token) reader.fail("array " + name + " row " + std::to_string(r) + " is long");
    }
    p.tensors.add(name, std::move(m));
  }
  {
    auto line = reader.next("end");
    std::string k;
    if (!(line >> k) || k != "end") reader.fail("expected 'end'");
  }

  // Names and shapes must match what the config implies.
  const PredictorParams ref = init_predictor(c, 0);
  if (ref.tensors.size() != p.tensors.size()) reader.fail("array count does not match the config");
  for (std::size_t i = 0; i < ref.tensors.size(); ++i) {
    if (ref.tensors.name(i) != p.tensors.name(i) || ref.tensors.value(i).rows() != p.tensors.value(i).rows() ||
        ref.tensors.value(i).cols() != p.tensors.value(i).cols()) {
      reader.fail("array '" + p.tensors.name(i) + "' does not match the config layout");
    }
  }
  return p;
}

void save_predictor(const std::string& path, const PredictorParams& params) {
  write_file_atomic(path, predictor_to_string(params));
}

PredictorParams load_predictor(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open model file " + path);
  return read_predictor(in);
}

}  // namespace arflow
