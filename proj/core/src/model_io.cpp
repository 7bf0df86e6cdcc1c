#include "dfprune/model_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <system_error>

#include "json.hpp"

#include "dfprune/error.hpp"

namespace dfprune {
namespace {

using nlohmann::json;

float to_float(const json& v, const std::string& where) {
  if (!v.is_number()) throw FormatError(where + ": expected a number");
  const double d = v.get<double>();
  const float f = static_cast<float>(d);
  if (!std::isfinite(d) || !std::isfinite(f)) throw NumericError(where + ": value is not a finite 32-bit float");
  return f;
}

std::vector<float> to_float_array(const json& v, const std::string& where) {
  if (!v.is_array()) throw FormatError(where + ": expected an array");
  std::vector<float> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(to_float(v[i], where));
  return out;
}

std::size_t to_size(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw FormatError(where + ": expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(where + ": missing field '" + key + "'");
  return *it;
}

void append_float(std::string& out, float v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

void append_floats(std::string& out, const float* data, std::size_t n) {
  out += '[';
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ", ";
    append_float(out, data[i]);
  }
  out += ']';
}

std::string json_string(const std::string& s) { return json(s).dump(); }

}  // namespace

Network parse_network(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("model parse error: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("model file must contain a JSON object");

  Network net;
  const auto& version = require(doc, "format_version", "model");
  if (!version.is_number_integer()) throw FormatError("format_version must be an integer");
  net.format_version = version.get<int>();
  if (net.format_version != 1) {
    throw FormatError("unsupported format_version " + std::to_string(net.format_version));
  }
  if (auto it = doc.find("name"); it != doc.end() && it->is_string()) net.name = it->get<std::string>();
  net.input_dim = to_size(require(doc, "input_dim", "model"), "input_dim");

  if (auto it = doc.find("input_bounds"); it == doc.end()) {
    set_uniform_input_bounds(net, 0.0f, 1.0f);
  } else {
    const auto& lo = require(*it, "lower", "input_bounds");
    const auto& hi = require(*it, "upper", "input_bounds");
    if (lo.is_number() && hi.is_number()) {
      set_uniform_input_bounds(net, to_float(lo, "input_bounds.lower"), to_float(hi, "input_bounds.upper"));
    } else {
      net.input_lower = to_float_array(lo, "input_bounds.lower");
      net.input_upper = to_float_array(hi, "input_bounds.upper");
      net.scalar_input_bounds = false;
    }
  }

  const auto& layers = require(doc, "layers", "model");
  if (!layers.is_array()) throw FormatError("layers must be an array");
  std::size_t fan_in = net.input_dim;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string where = "layers[" + std::to_string(l) + "]";
    const auto& spec = layers[l];
    if (!spec.is_object()) throw FormatError(where + " must be an object");
    const std::size_t units = to_size(require(spec, "units", where), where + ".units");
    const auto& act = require(spec, "activation", where);
    if (!act.is_string()) throw FormatError(where + ".activation must be a string");

    const auto& rows = require(spec, "weights", where);
    if (!rows.is_array()) throw FormatError(where + ".weights must be an array");
    if (rows.size() != fan_in) {
      throw ShapeError(where + " has " + std::to_string(rows.size()) + " weight rows, expected fan_in " +
                       std::to_string(fan_in));
    }
    DenseLayer layer(fan_in, units, parse_activation(act.get<std::string>()));
    for (std::size_t i = 0; i < fan_in; ++i) {
      const auto row = to_float_array(rows[i], where + ".weights");
      if (row.size() != units) {
        throw ShapeError(where + ".weights row " + std::to_string(i) + " has " + std::to_string(row.size()) +
                         " columns, expected " + std::to_string(units));
      }
      std::copy(row.begin(), row.end(), layer.weights.begin() + static_cast<std::ptrdiff_t>(i * units));
    }
    layer.bias = to_float_array(require(spec, "bias", where), where + ".bias");
    if (layer.bias.size() != units) throw ShapeError(where + ".bias length does not match units");
    if (auto it = spec.find("alive"); it != spec.end()) {
      if (!it->is_array() || it->size() != units) throw ShapeError(where + ".alive length does not match units");
      for (std::size_t j = 0; j < units; ++j) {
        if (!(*it)[j].is_boolean()) throw FormatError(where + ".alive must hold booleans");
        layer.alive[j] = (*it)[j].get<bool>();
      }
    }
    net.layers.push_back(std::move(layer));
    fan_in = units;
  }
  validate(net);
  return net;
}

Network load_network(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open model " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_network(text);
}

std::string serialize_network(const Network& net) {
  validate(net);
  std::string out;
  out += "{\n  \"format_version\": " + std::to_string(net.format_version) + ",\n";
  out += "  \"name\": " + json_string(net.name) + ",\n";
  out += "  \"input_dim\": " + std::to_string(net.input_dim) + ",\n";
  if (net.scalar_input_bounds) {
    out += "  \"input_bounds\": {\"lower\": ";
    append_float(out, net.input_lower.front());
    out += ", \"upper\": ";
    append_float(out, net.input_upper.front());
    out += "},\n";
  } else {
    out += "  \"input_bounds\": {\n    \"lower\": ";
    append_floats(out, net.input_lower.data(), net.input_lower.size());
    out += ",\n    \"upper\": ";
    append_floats(out, net.input_upper.data(), net.input_upper.size());
    out += "\n  },\n";
  }
  out += "  \"layers\": [\n";
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    out += "    {\n      \"units\": " + std::to_string(layer.fan_out) + ",\n";
    out += "      \"activation\": \"" + std::string(to_string(layer.activation)) + "\",\n";
    out += "      \"weights\": [\n";
    for (std::size_t i = 0; i < layer.fan_in; ++i) {
      out += "        ";
      append_floats(out, &layer.weights[i * layer.fan_out], layer.fan_out);
      out += i + 1 < layer.fan_in ? ",\n" : "\n";
    }
    out += "      ],\n      \"bias\": ";
    append_floats(out, layer.bias.data(), layer.bias.size());
    if (layer.alive_count() != layer.fan_out) {
      out += ",\n      \"alive\": [";
      for (std::size_t j = 0; j < layer.fan_out; ++j) {
        if (j) out += ", ";
        out += layer.alive[j] ? "true" : "false";
      }
      out += ']';
    }
    out += "\n    }";
    out += l + 1 < net.layers.size() ? ",\n" : "\n";
  }
  out += "  ]\n}\n";
  return out;
}

void save_network(const Network& net, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_network(net));
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out.flush()) throw Error("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot move " + tmp.string() + " into place: " + ec.message());
}

}  // namespace dfprune
