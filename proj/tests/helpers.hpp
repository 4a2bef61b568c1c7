#pragma once

#include "micg/micg.hpp"

#include <string>
#include <vector>

namespace testing_util {

inline micg::IndicatorCatalog reference_catalog(double domestic_hours_threshold = 3.0) {
    auto c = micg::load_catalog(std::string(MICG_DATA_DIR) + "/reference_catalog.json");
    c.set_parameter("domestic_hours_threshold", domestic_hours_threshold);
    return c;
}

inline micg::ChildInfo child(std::string id, micg::Sex s = micg::Sex::male, micg::Area a = micg::Area::urban,
                             std::string country = "X") {
    return {std::move(id), s, a, std::move(country)};
}

/// Matrix from 0/1/-1 rows with generated child ids.
inline micg::DeprivationMatrix matrix(const std::vector<std::string> &ids, const std::vector<std::vector<int>> &rows,
                                      micg::MissingPolicy policy = micg::MissingPolicy::exclude_child) {
    micg::DeprivationMatrix m;
    m.indicators = ids;
    m.policy = policy;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        m.children.push_back(child("c" + std::to_string(i + 1)));
        for (int v : rows[i]) {
            m.cells.push_back(static_cast<micg::Cell>(v));
        }
    }
    return m;
}

} // namespace testing_util

#include <boost/property_tree/detail/rapidxml.hpp>

namespace testing_util {

/// Strict parse (closing tags validated); false on any XML error.
inline bool well_formed_xml(const std::string &text) {
    namespace rx = boost::property_tree::detail::rapidxml;
    std::vector<char> buf(text.begin(), text.end());
    buf.push_back('\0');
    rx::xml_document<char> doc;
    try {
        doc.parse<rx::parse_full>(buf.data());
    } catch (const rx::parse_error &) {
        return false;
    }
    return doc.first_node("svg") != nullptr;
}

inline std::size_t count(const std::string &hay, const std::string &needle) {
    std::size_t n = 0;
    for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
    return n;
}

} // namespace testing_util
