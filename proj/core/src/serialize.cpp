#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "pgig/csv.hpp"
#include "pgig/error.hpp"
#include "pgig/network.hpp"

namespace pgig {

namespace {

constexpr std::string_view kMagic = "pgig-network";
constexpr int kVersion = 1;

void write_row(std::ostream& out, std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ' ';
    out << format_number(values[i]);
  }
  out << '\n';
}

class LineReader {
 public:
  LineReader(std::istream& in, std::string_view source) : in_(in), source_(source) {}

  std::vector<std::string> tokens(const char* expecting) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      std::istringstream ss(line);
      std::vector<std::string> out;
      for (std::string t; ss >> t;) out.push_back(t);
      return out;
    }
    fail(std::string("unexpected end of file, expecting ") + expecting);
  }

  std::vector<double> numbers(std::size_t count, const char* what) {
    const auto toks = tokens(what);
    if (toks.size() != count) {
      fail(std::string(what) + ": expected " + std::to_string(count) + " values, got " +
           std::to_string(toks.size()));
    }
    std::vector<double> out;
    out.reserve(count);
    for (const auto& t : toks) {
      const auto v = parse_number(t);
      if (!v) fail(std::string(what) + ": not a number '" + t + "'");
      out.push_back(*v);
    }
    return out;
  }

  std::size_t count(const std::string& token, const char* what) {
    const auto v = parse_number(token);
    if (!v || *v < 0 || *v != static_cast<double>(static_cast<std::size_t>(*v))) {
      fail(std::string(what) + ": expected a count, got '" + token + "'");
    }
    return static_cast<std::size_t>(*v);
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, line_no_, what); }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_no_ = 0;
};

}  // namespace

void save_network(std::ostream& out, const Network& net) {
  out << kMagic << ' ' << kVersion << ' ' << net.depth() << ' ' << to_string(net.output_mode()) << '\n';
  for (const Layer& layer : net.layers()) {
    out << "layer " << layer.in_dim() << ' ' << layer.out_dim() << ' ' << to_string(layer.activation) << ' '
        << (layer.pattern ? "pattern" : "nopattern") << '\n';
    for (std::size_t j = 0; j < layer.out_dim(); ++j) write_row(out, layer.weights.row(j));
    write_row(out, layer.bias.values());
    if (layer.pattern) {
      for (std::size_t j = 0; j < layer.out_dim(); ++j) write_row(out, layer.pattern->row(j));
    }
  }
}

Network load_network(std::istream& in, std::string_view source_name) {
  LineReader reader(in, source_name);
  const auto header = reader.tokens("header");
  if (header.size() != 4 || header[0] != kMagic) reader.fail("not a pgig network file");
  if (header[1] != std::to_string(kVersion)) reader.fail("unsupported format version " + header[1]);
  const std::size_t depth = reader.count(header[2], "layer count");
  OutputMode mode;
  if (header[3] == "raw") {
    mode = OutputMode::Raw;
  } else if (header[3] == "softmax") {
    mode = OutputMode::Softmax;
  } else {
    reader.fail("unknown output mode '" + header[3] + "'");
  }

  std::vector<Layer> layers;
  for (std::size_t k = 0; k < depth; ++k) {
    const auto fields = reader.tokens("layer header");
    if (fields.size() != 5 || fields[0] != "layer") reader.fail("expected 'layer <in> <out> <activation> <pattern|nopattern>'");
    const std::size_t in_dim = reader.count(fields[1], "input dimension");
    const std::size_t out_dim = reader.count(fields[2], "output dimension");
    Activation act;
    if (fields[3] == "linear") {
      act = Activation::Linear;
    } else if (fields[3] == "relu") {
      act = Activation::ReLU;
    } else {
      reader.fail("unknown activation '" + fields[3] + "'");
    }
    if (fields[4] != "pattern" && fields[4] != "nopattern") reader.fail("expected pattern or nopattern");
    const bool has_pattern = fields[4] == "pattern";

    std::vector<double> weights;
    weights.reserve(in_dim * out_dim);
    for (std::size_t j = 0; j < out_dim; ++j) {
      const auto row = reader.numbers(in_dim, "weight row");
      weights.insert(weights.end(), row.begin(), row.end());
    }
    auto bias = reader.numbers(out_dim, "bias");
    std::optional<Tensor> pattern;
    if (has_pattern) {
      std::vector<double> p;
      p.reserve(in_dim * out_dim);
      for (std::size_t j = 0; j < out_dim; ++j) {
        const auto row = reader.numbers(in_dim, "pattern row");
        p.insert(p.end(), row.begin(), row.end());
      }
      pattern = Tensor::matrix(out_dim, in_dim, std::move(p));
    }
    layers.push_back(make_layer(Tensor::matrix(out_dim, in_dim, std::move(weights)),
                                Tensor::vector(std::move(bias)), act, std::move(pattern)));
  }
  return Network(std::move(layers), mode);
}

void save_network(const std::filesystem::path& path, const Network& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot open " + path.string() + " for writing");
  save_network(out, net);
  if (!out) throw ArgumentError("failed writing " + path.string());
}

Network load_network(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open network file " + path.string());
  return load_network(in, path.string());
}

}  // namespace pgig
