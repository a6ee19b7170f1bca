#include "temviro/arch_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "temviro/error.hpp"

namespace temviro {
namespace {

[[noreturn]] void invalid(const std::string& what) { fail(ErrorCode::InvalidArchitecture, what); }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::size_t to_size(const std::string& s, const std::string& ctx) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) invalid(ctx + ": '" + s + "' is not a non-negative integer");
  return v;
}

double to_double(const std::string& s, const std::string& ctx) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (...) {
  }
  invalid(ctx + ": '" + s + "' is not a number");
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string layer_text(const LayerSpec& l) {
  switch (l.kind) {
    case LayerKind::conv2d:
      return "conv(" + std::to_string(l.filters) + "," + std::to_string(l.kernel) + "," + std::string(nn::to_string(l.activation)) + ")";
    case LayerKind::maxpool2d: return "maxpool(" + std::to_string(l.pool) + ")";
    case LayerKind::batchnorm: return "batchnorm";
    case LayerKind::dropout: return "dropout(" + format_double(l.rate) + ")";
    case LayerKind::dense: return "dense(" + std::to_string(l.units) + "," + std::string(nn::to_string(l.activation)) + ")";
    case LayerKind::flatten: return "flatten";
    case LayerKind::sigmoid: return "sigmoid";
    case LayerKind::relu: return "relu";
    case LayerKind::softmax: return "softmax";
    case LayerKind::concat: return "concat";
  }
  return "";
}

std::string layers_text(const std::vector<LayerSpec>& layers) {
  std::string s;
  for (const auto& l : layers) s += (s.empty() ? "" : " ") + layer_text(l);
  return s;
}

LayerSpec parse_layer(const std::string& token, const std::string& ctx) {
  const auto open = token.find('(');
  const std::string name = token.substr(0, open);
  std::vector<std::string> args;
  if (open != std::string::npos) {
    if (token.back() != ')') invalid(ctx + ": unbalanced parentheses in '" + token + "'");
    std::stringstream ss(token.substr(open + 1, token.size() - open - 2));
    std::string a;
    while (std::getline(ss, a, ',')) args.push_back(trim(a));
  }
  auto want = [&](std::size_t n) {
    if (args.size() != n) invalid(ctx + ": '" + name + "' takes " + std::to_string(n) + " argument(s), got '" + token + "'");
  };
  const std::string where = ctx + " " + token;
  try {
    if (name == "conv") {
      want(3);
      return LayerSpec::conv(to_size(args[0], where), to_size(args[1], where), nn::parse_activation(args[2]));
    }
    if (name == "maxpool") {
      want(1);
      return LayerSpec::maxpool(to_size(args[0], where));
    }
    if (name == "dropout") {
      want(1);
      return LayerSpec::dropout(to_double(args[0], where));
    }
    if (name == "dense") {
      want(2);
      return LayerSpec::dense(to_size(args[0], where), nn::parse_activation(args[1]));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArchitecture) throw;
    invalid(where + ": " + e.what());
  }
  want(0);
  if (name == "batchnorm") return LayerSpec::batchnorm();
  if (name == "flatten") return LayerSpec::flatten();
  if (name == "sigmoid") return {LayerKind::sigmoid};
  if (name == "relu") return {LayerKind::relu};
  if (name == "softmax") return {LayerKind::softmax};
  invalid(ctx + ": unknown layer '" + token + "'");
}

std::vector<LayerSpec> parse_layers(const std::string& value, const std::string& ctx) {
  // Split on whitespace outside parentheses.
  std::vector<LayerSpec> out;
  std::string token;
  int depth = 0;
  auto flush = [&] {
    if (!token.empty()) out.push_back(parse_layer(token, ctx));
    token.clear();
  };
  for (char c : value) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if ((c == ' ' || c == '\t') && depth == 0) {
      flush();
    } else if (c != ' ' && c != '\t') {
      token += c;
    }
  }
  flush();
  return out;
}

// Activation a conv layer feeds into: its own, or a standalone activation
// layer immediately after it.
nn::Activation effective_activation(const std::vector<LayerSpec>& layers, std::size_t i) {
  if (layers[i].activation != nn::Activation::identity) return layers[i].activation;
  if (i + 1 < layers.size()) {
    switch (layers[i + 1].kind) {
      case LayerKind::sigmoid: return nn::Activation::sigmoid;
      case LayerKind::relu: return nn::Activation::relu;
      case LayerKind::softmax: return nn::Activation::softmax;
      default: break;
    }
  }
  return nn::Activation::identity;
}

std::size_t count_kind(const std::vector<LayerSpec>& layers, LayerKind k) {
  return static_cast<std::size_t>(std::count_if(layers.begin(), layers.end(), [k](const LayerSpec& l) { return l.kind == k; }));
}

void check_common(const std::vector<LayerSpec>& layers, const std::string& name) {
  for (const auto& l : layers) {
    if (l.kind == LayerKind::conv2d && (l.kernel != 3 || l.filters == 0)) invalid(name + ": conv kernels must be 3x3 with >= 1 filter");
    if (l.kind == LayerKind::maxpool2d && l.pool == 0) invalid(name + ": maxpool size must be >= 1");
    if (l.kind == LayerKind::dropout && !(l.rate >= 0.0 && l.rate < 1.0)) invalid(name + ": dropout rate must lie in [0, 1)");
    if (l.kind == LayerKind::dense && l.units == 0) invalid(name + ": dense width must be >= 1");
  }
}

void check_branch(const std::vector<LayerSpec>& layers, const std::string& name, std::size_t convs, std::size_t sigmoids,
                  std::size_t relus) {
  check_common(layers, name);
  if (count_kind(layers, LayerKind::conv2d) != convs) invalid(name + " must have exactly " + std::to_string(convs) + " conv layers");
  std::size_t sig = 0, rel = 0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].kind != LayerKind::conv2d) continue;
    const auto a = effective_activation(layers, i);
    sig += a == nn::Activation::sigmoid;
    rel += a == nn::Activation::relu;
  }
  if (sig != sigmoids || rel != relus) {
    invalid(name + " conv activations must be " + std::to_string(sigmoids) + " sigmoid and " + std::to_string(relus) + " relu");
  }
  if (count_kind(layers, LayerKind::maxpool2d) != 3) invalid(name + " must have exactly 3 maxpool layers");
  if (count_kind(layers, LayerKind::batchnorm) != 1) invalid(name + " must have exactly 1 batchnorm layer");
  if (layers.empty() || layers.back().kind != LayerKind::flatten || count_kind(layers, LayerKind::flatten) != 1) {
    invalid(name + " must end in a single flatten");
  }
  for (const auto& l : layers) {
    if (l.kind == LayerKind::dense || l.kind == LayerKind::softmax || l.kind == LayerKind::concat) {
      invalid(name + " may not contain " + std::string(to_string(l.kind)));
    }
  }
}

}  // namespace

std::string_view to_string(LayerKind k) {
  switch (k) {
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::sigmoid: return "sigmoid";
    case LayerKind::relu: return "relu";
    case LayerKind::softmax: return "softmax";
    case LayerKind::maxpool2d: return "maxpool2d";
    case LayerKind::batchnorm: return "batchnorm";
    case LayerKind::dropout: return "dropout";
    case LayerKind::dense: return "dense";
    case LayerKind::flatten: return "flatten";
    case LayerKind::concat: return "concat";
  }
  return "";
}

LayerSpec LayerSpec::conv(std::size_t filters, std::size_t kernel, nn::Activation a) {
  LayerSpec l{LayerKind::conv2d};
  l.filters = filters;
  l.kernel = kernel;
  l.activation = a;
  return l;
}

LayerSpec LayerSpec::maxpool(std::size_t pool) {
  LayerSpec l{LayerKind::maxpool2d};
  l.pool = pool;
  return l;
}

LayerSpec LayerSpec::batchnorm() { return {LayerKind::batchnorm}; }

LayerSpec LayerSpec::dropout(double rate) {
  LayerSpec l{LayerKind::dropout};
  l.rate = rate;
  return l;
}

LayerSpec LayerSpec::dense(std::size_t units, nn::Activation a) {
  LayerSpec l{LayerKind::dense};
  l.units = units;
  l.activation = a;
  return l;
}

LayerSpec LayerSpec::flatten() { return {LayerKind::flatten}; }

std::string_view to_string(FusionMode m) {
  switch (m) {
    case FusionMode::fused: return "fused";
    case FusionMode::branch1_only: return "branch1_only";
    case FusionMode::branch2_only: return "branch2_only";
  }
  return "fused";
}

FusionMode parse_fusion_mode(std::string_view text) {
  if (text == "fused") return FusionMode::fused;
  if (text == "branch1_only" || text == "branch1") return FusionMode::branch1_only;
  if (text == "branch2_only" || text == "branch2") return FusionMode::branch2_only;
  fail(ErrorCode::InvalidArgument, "unknown mode '" + std::string(text) + "'");
}

std::string ArchConfig::to_text() const {
  std::ostringstream os;
  os << "version = " << version << "\n"
     << "num_classes = " << num_classes << "\n"
     << "input_size = " << input_size << "\n"
     << "mode = " << to_string(mode) << "\n"
     << "dct_signed_log = " << (dct_signed_log ? "true" : "false") << "\n"
     << "branch1 = " << layers_text(branch1) << "\n"
     << "branch2 = " << layers_text(branch2) << "\n"
     << "classifier = " << layers_text(classifier) << "\n";
  return os.str();
}

ArchConfig default_arch_config() {
  using nn::Activation;
  ArchConfig cfg;
  cfg.branch1 = {LayerSpec::conv(16, 3, Activation::sigmoid), LayerSpec::maxpool(3),
                 LayerSpec::conv(32, 3, Activation::sigmoid), LayerSpec::maxpool(3),
                 LayerSpec::batchnorm(),
                 LayerSpec::conv(64, 3, Activation::relu),    LayerSpec::maxpool(3),
                 LayerSpec::dropout(0.25),                    LayerSpec::flatten()};
  cfg.branch2 = {LayerSpec::conv(16, 3, Activation::relu),  LayerSpec::maxpool(3),
                 LayerSpec::conv(32, 3, Activation::relu),  LayerSpec::maxpool(3),
                 LayerSpec::batchnorm(),
                 LayerSpec::conv(64, 3, Activation::relu),  LayerSpec::conv(128, 3, Activation::relu),
                 LayerSpec::maxpool(3),
                 LayerSpec::dropout(0.25),                  LayerSpec::flatten()};
  cfg.classifier = {LayerSpec::dense(512, Activation::relu), LayerSpec::dropout(0.5),
                    LayerSpec::dense(256, Activation::relu), LayerSpec::dense(128, Activation::relu),
                    LayerSpec::dense(64, Activation::relu),  LayerSpec::dense(14, Activation::softmax)};
  return cfg;
}

ArchConfig parse_arch_config(std::string_view text) {
  ArchConfig cfg;
  cfg.branch1.clear();
  cfg.branch2.clear();
  cfg.classifier.clear();
  std::map<std::string, bool> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) invalid("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.rfind("meta.", 0) == 0) continue;
    if (seen[key]) invalid("config key '" + key + "' given twice");
    seen[key] = true;
    const std::string ctx = "config line " + std::to_string(line_no);
    if (key == "version") {
      cfg.version = static_cast<int>(to_size(value, ctx));
      if (cfg.version != kArchConfigVersion) {
        fail(ErrorCode::VersionMismatch, "config version " + value + ", expected " + std::to_string(kArchConfigVersion));
      }
    } else if (key == "num_classes") {
      cfg.num_classes = to_size(value, ctx);
    } else if (key == "input_size") {
      cfg.input_size = to_size(value, ctx);
    } else if (key == "mode") {
      try {
        cfg.mode = parse_fusion_mode(value);
      } catch (const Error& e) {
        invalid(ctx + ": " + e.what());
      }
    } else if (key == "dct_signed_log") {
      if (value != "true" && value != "false") invalid(ctx + ": dct_signed_log must be true or false");
      cfg.dct_signed_log = value == "true";
    } else if (key == "branch1") {
      cfg.branch1 = parse_layers(value, ctx);
    } else if (key == "branch2") {
      cfg.branch2 = parse_layers(value, ctx);
    } else if (key == "classifier") {
      cfg.classifier = parse_layers(value, ctx);
    } else {
      invalid(ctx + ": unknown key '" + key + "'");
    }
  }
  for (const char* required : {"version", "branch1", "branch2", "classifier"}) {
    if (!seen[required]) invalid(std::string("config is missing '") + required + "'");
  }
  return cfg;
}

ArchConfig load_arch_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_arch_config(ss.str());
}

std::size_t branch_feature_length(const std::vector<LayerSpec>& branch, std::size_t input_size) {
  std::size_t c = 1, h = input_size, w = input_size;
  for (const auto& l : branch) {
    if (l.kind == LayerKind::conv2d) {
      if (h < l.kernel || w < l.kernel) invalid("feature map " + std::to_string(h) + "x" + std::to_string(w) + " too small for a conv layer");
      h = h - l.kernel + 1;
      w = w - l.kernel + 1;
      c = l.filters;
    } else if (l.kind == LayerKind::maxpool2d) {
      if (l.pool == 0 || h / l.pool == 0 || w / l.pool == 0) {
        invalid("feature map " + std::to_string(h) + "x" + std::to_string(w) + " vanishes under maxpool(" + std::to_string(l.pool) + ")");
      }
      h /= l.pool;
      w /= l.pool;
    }
  }
  return c * h * w;
}

std::size_t classifier_input_length(const ArchConfig& cfg) {
  std::size_t n = 0;
  if (cfg.uses_branch1()) n += branch_feature_length(cfg.branch1, cfg.input_size);
  if (cfg.uses_branch2()) n += branch_feature_length(cfg.branch2, cfg.input_size);
  return n;
}

void validate(const ArchConfig& cfg) {
  if (cfg.version != kArchConfigVersion) fail(ErrorCode::VersionMismatch, "config version " + std::to_string(cfg.version));
  if (cfg.num_classes < 2) invalid("num_classes must be >= 2");
  check_branch(cfg.branch1, "branch1", 3, 2, 1);
  check_branch(cfg.branch2, "branch2", 4, 0, 4);

  check_common(cfg.classifier, "classifier");
  if (count_kind(cfg.classifier, LayerKind::dense) != 5) invalid("classifier must have exactly 5 dense layers");
  if (count_kind(cfg.classifier, LayerKind::dropout) < 1) invalid("classifier must have at least 1 dropout layer");
  for (const auto& l : cfg.classifier) {
    if (l.kind != LayerKind::dense && l.kind != LayerKind::dropout && l.kind != LayerKind::batchnorm &&
        l.kind != LayerKind::relu && l.kind != LayerKind::sigmoid) {
      invalid("classifier may not contain " + std::string(to_string(l.kind)));
    }
  }
  const auto& last = cfg.classifier.back();
  if (last.kind != LayerKind::dense || last.units != cfg.num_classes || last.activation != nn::Activation::softmax) {
    invalid("classifier must end in dense(" + std::to_string(cfg.num_classes) + ",softmax)");
  }
  for (std::size_t i = 0; i + 1 < cfg.classifier.size(); ++i) {
    if (cfg.classifier[i].activation == nn::Activation::softmax) invalid("softmax is only allowed on the final dense layer");
  }

  branch_feature_length(cfg.branch1, cfg.input_size);
  branch_feature_length(cfg.branch2, cfg.input_size);
}

std::size_t parameter_count(const LayerSpec& layer, std::size_t inputs) {
  switch (layer.kind) {
    case LayerKind::conv2d: return layer.filters * inputs * layer.kernel * layer.kernel + layer.filters;
    case LayerKind::dense: return inputs * layer.units + layer.units;
    case LayerKind::batchnorm: return 2 * inputs;
    default: return 0;
  }
}

std::size_t parameter_count(const ArchConfig& cfg) {
  std::size_t total = 0;
  auto run = [&](const std::vector<LayerSpec>& layers, std::size_t width) {
    for (const auto& l : layers) {
      total += parameter_count(l, width);
      if (l.kind == LayerKind::conv2d) width = l.filters;
      if (l.kind == LayerKind::dense) width = l.units;
    }
  };
  if (cfg.uses_branch1()) run(cfg.branch1, 1);
  if (cfg.uses_branch2()) run(cfg.branch2, 1);
  run(cfg.classifier, classifier_input_length(cfg));
  return total;
}

}  // namespace temviro
