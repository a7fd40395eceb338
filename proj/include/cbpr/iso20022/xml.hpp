// Copyright 2026 The cbpr-sim Authors.
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

#pragma once

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <sstream>
#include <string>
#include <string_view>

#include "cbpr/error.hpp"

// Small XML toolkit shared by the pacs codecs: a canonical writer and
// namespace-agnostic readers over boost::property_tree.
namespace cbpr::iso20022::xml {

using Tree = boost::property_tree::ptree;

inline constexpr std::string_view kDeclaration = R"(<?xml version="1.0" encoding="UTF-8"?>)";
inline constexpr std::string_view kAttrKey = "<xmlattr>";

inline std::string escape(std::string_view text, bool attribute = false) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"':
        if (attribute) {
          out += "&quot;";
          break;
        }
        [[fallthrough]];
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::string_view local_name(std::string_view name) {
  const auto colon = name.find(':');
  return colon == std::string_view::npos ? name : name.substr(colon + 1);
}

inline bool is_markup_key(std::string_view key) { return !key.empty() && key.front() == '<'; }

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

/// Appends elements to a buffer with no insignificant whitespace.
class Writer {
 public:
  Writer& open(std::string_view name) {
    out_ += '<';
    out_ += name;
    out_ += '>';
    return *this;
  }
  Writer& open(std::string_view name, std::string_view attr, std::string_view value) {
    out_ += '<';
    out_ += name;
    out_ += ' ';
    out_ += attr;
    out_ += "=\"";
    out_ += escape(value, true);
    out_ += "\">";
    return *this;
  }
  Writer& close(std::string_view name) {
    out_ += "</";
    out_ += name;
    out_ += '>';
    return *this;
  }
  Writer& leaf(std::string_view name, std::string_view text) {
    open(name);
    out_ += escape(text);
    return close(name);
  }
  Writer& leaf(std::string_view name, std::string_view attr, std::string_view value, std::string_view text) {
    open(name, attr, value);
    out_ += escape(text);
    return close(name);
  }
  Writer& raw(std::string_view fragment) {
    out_ += fragment;
    return *this;
  }

  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

/// Canonical form of an arbitrary subtree: local names, attributes in
/// document order, trimmed text, children in document order.
inline void write_canonical(Writer& w, std::string_view name, const Tree& node) {
  std::string head = std::string(local_name(name));
  std::string start = "<" + head;
  if (auto attrs = node.get_child_optional(std::string(kAttrKey))) {
    for (const auto& [k, v] : *attrs) start += " " + k + "=\"" + escape(v.data(), true) + "\"";
  }
  start += ">";
  w.raw(start);
  bool has_children = false;
  for (const auto& [k, v] : node) {
    if (is_markup_key(k)) continue;
    has_children = true;
    write_canonical(w, k, v);
  }
  if (!has_children) w.raw(escape(trim(node.data())));
  w.close(head);
}

inline std::string canonical_fragment(std::string_view name, const Tree& node) {
  Writer w;
  write_canonical(w, name, node);
  return w.take();
}

inline Tree read(std::string_view bytes) {
  Tree tree;
  std::istringstream in{std::string(bytes)};
  try {
    boost::property_tree::read_xml(in, tree, boost::property_tree::xml_parser::no_comments);
  } catch (const boost::property_tree::xml_parser_error& e) {
    throw Error(Errc::MalformedXml, "line " + std::to_string(e.line()) + ": " + e.message());
  }
  return tree;
}

/// First child whose local name matches, or nullptr.
inline const Tree* child(const Tree& parent, std::string_view name) {
  for (const auto& [k, v] : parent)
    if (!is_markup_key(k) && local_name(k) == name) return &v;
  return nullptr;
}

inline std::size_t count_children(const Tree& parent, std::string_view name) {
  std::size_t n = 0;
  for (const auto& [k, v] : parent)
    if (!is_markup_key(k) && local_name(k) == name) ++n;
  return n;
}

inline std::string attribute(const Tree& node, std::string_view name) {
  if (auto attrs = node.get_child_optional(std::string(kAttrKey)))
    for (const auto& [k, v] : *attrs)
      if (local_name(k) == name) return v.data();
  return {};
}

/// Walks `path` (slash-separated local names) below `base`, where
/// `base_path` is the display prefix used in error messages.
inline const Tree& require(const Tree& base, std::string_view base_path, std::string_view path) {
  const Tree* node = &base;
  std::string_view rest = path;
  while (!rest.empty()) {
    const auto slash = rest.find('/');
    const auto part = rest.substr(0, slash);
    node = child(*node, part);
    if (node == nullptr) {
      const std::string missing = std::string(base_path) + "/" + std::string(path);
      throw Error(Errc::SchemaViolation, "missing required element " + missing);
    }
    rest = slash == std::string_view::npos ? std::string_view{} : rest.substr(slash + 1);
  }
  return *node;
}

inline std::string require_text(const Tree& base, std::string_view base_path, std::string_view path) {
  return trim(require(base, base_path, path).data());
}

}  // namespace cbpr::iso20022::xml
