#include <cmath>

#include <json.hpp>

#include "epialign/error.hpp"
#include "epialign/regress.hpp"

namespace epialign::regress {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* field, const std::string& where) {
    const auto it = obj.find(field);
    if (it == obj.end()) {
        throw FormatError("model JSON: missing field '" + where + field + "'");
    }
    return *it;
}

double require_number(const json& obj, const char* field, const std::string& where = "") {
    const json& v = require(obj, field, where);
    if (!v.is_number()) {
        throw FormatError("model JSON: field '" + where + field + "' must be a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        throw FormatError("model JSON: field '" + where + field + "' must be finite");
    }
    return d;
}

std::vector<double> require_numbers(const json& obj, const char* field, const std::string& where = "") {
    const json& v = require(obj, field, where);
    if (!v.is_array()) {
        throw FormatError("model JSON: field '" + where + field + "' must be an array");
    }
    std::vector<double> out;
    out.reserve(v.size());
    for (const json& e : v) {
        if (!e.is_number()) {
            throw FormatError("model JSON: field '" + where + field + "' must hold numbers");
        }
        out.push_back(e.get<double>());
    }
    return out;
}

}  // namespace

void save_model(const SvrModel& model, std::ostream& out) {
    json kernel = {
        {"kind", std::string(to_string(model.params.kernel.kind))},
        {"coef0", model.params.kernel.coef0},
        {"degree", model.params.kernel.degree},
    };
    kernel["gamma"] = model.params.kernel.gamma ? json(*model.params.kernel.gamma) : json("scale");

    json svs = json::array();
    for (std::size_t r = 0; r < model.support_vectors.rows(); ++r) {
        const auto row = model.support_vectors.row(r);
        svs.push_back(std::vector<double>(row.begin(), row.end()));
    }
    const json doc = {
        {"version", kModelFormatVersion},
        {"kernel", kernel},
        {"C", model.params.C},
        {"epsilon", model.params.epsilon},
        {"tol", model.params.tol},
        {"max_passes", model.params.max_passes.value_or(0)},
        {"seed", model.params.seed},
        {"scaler",
         {
             {"means", model.scaler.means},
             {"scales", model.scaler.scales},
             {"target_mean", model.scaler.target_mean},
             {"target_scale", model.scaler.target_scale},
         }},
        {"support_vectors", svs},
        {"support_index", model.support_index},
        {"dual_coefs", model.dual_coefs},
        {"bias", model.bias},
        {"converged", model.converged},
        {"iterations", model.iterations},
        {"kkt_violation", model.kkt_violation},
    };
    out << doc.dump(2) << '\n';
    if (!out) {
        throw IoError("failed writing model JSON");
    }
}

SvrModel load_model(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError(std::string("model JSON: parse error: ") + e.what());
    }
    if (!doc.is_object()) {
        throw FormatError("model JSON: top level must be an object");
    }
    const json& version = require(doc, "version", "");
    if (!version.is_number_integer()) {
        throw FormatError("model JSON: field 'version' must be an integer");
    }
    if (version.get<int>() != kModelFormatVersion) {
        throw UnsupportedVersionError("model JSON: unsupported version " + version.dump() + " (expected " +
                                      std::to_string(kModelFormatVersion) + ")");
    }

    SvrModel m;
    const json& kernel = require(doc, "kernel", "");
    if (!kernel.is_object()) {
        throw FormatError("model JSON: field 'kernel' must be an object");
    }
    const json& kind = require(kernel, "kind", "kernel.");
    if (!kind.is_string()) {
        throw FormatError("model JSON: field 'kernel.kind' must be a string");
    }
    m.params.kernel.kind = parse_kernel_kind(kind.get<std::string>());
    const json& gamma = require(kernel, "gamma", "kernel.");
    if (gamma.is_number()) {
        m.params.kernel.gamma = gamma.get<double>();
    } else if (!(gamma.is_string() && gamma.get<std::string>() == "scale")) {
        throw FormatError("model JSON: field 'kernel.gamma' must be a number or \"scale\"");
    }
    m.params.kernel.coef0 = require_number(kernel, "coef0", "kernel.");
    const json& degree = require(kernel, "degree", "kernel.");
    if (!degree.is_number_integer()) {
        throw FormatError("model JSON: field 'kernel.degree' must be an integer");
    }
    m.params.kernel.degree = degree.get<int>();

    m.params.C = require_number(doc, "C");
    m.params.epsilon = require_number(doc, "epsilon");
    if (doc.contains("tol")) m.params.tol = require_number(doc, "tol");
    if (doc.contains("max_passes") && doc["max_passes"].is_number_unsigned() && doc["max_passes"].get<std::size_t>() > 0) {
        m.params.max_passes = doc["max_passes"].get<std::size_t>();
    }
    if (doc.contains("seed") && doc["seed"].is_number_unsigned()) {
        m.params.seed = doc["seed"].get<std::uint64_t>();
    }
    try {
        m.params.validate();
    } catch (const ContractError& e) {
        throw FormatError(std::string("model JSON: ") + e.what());
    }

    const json& scaler = require(doc, "scaler", "");
    if (!scaler.is_object()) {
        throw FormatError("model JSON: field 'scaler' must be an object");
    }
    m.scaler.means = require_numbers(scaler, "means", "scaler.");
    m.scaler.scales = require_numbers(scaler, "scales", "scaler.");
    m.scaler.target_mean = require_number(scaler, "target_mean", "scaler.");
    m.scaler.target_scale = require_number(scaler, "target_scale", "scaler.");
    if (m.scaler.means.size() != m.scaler.scales.size()) {
        throw FormatError("model JSON: scaler means and scales differ in length");
    }
    for (double s : m.scaler.scales) {
        if (!(s > 0.0)) throw FormatError("model JSON: scaler scales must be positive");
    }
    if (!(m.scaler.target_scale > 0.0)) {
        throw FormatError("model JSON: scaler target_scale must be positive");
    }

    const json& svs = require(doc, "support_vectors", "");
    if (!svs.is_array()) {
        throw FormatError("model JSON: field 'support_vectors' must be an array");
    }
    m.support_vectors = Matrix(0, m.scaler.means.size());
    for (const json& row : svs) {
        if (!row.is_array() || row.size() != m.scaler.means.size()) {
            throw FormatError("model JSON: support vector rows must have " + std::to_string(m.scaler.means.size()) +
                              " numbers");
        }
        std::vector<double> values;
        for (const json& v : row) {
            if (!v.is_number()) throw FormatError("model JSON: support vectors must hold numbers");
            values.push_back(v.get<double>());
        }
        m.support_vectors.append_row(values);
    }
    m.dual_coefs = require_numbers(doc, "dual_coefs");
    if (m.dual_coefs.size() != m.support_vectors.rows()) {
        throw FormatError("model JSON: dual_coefs length differs from support_vectors row count");
    }
    if (doc.contains("support_index") && doc["support_index"].is_array()) {
        for (const json& v : doc["support_index"]) {
            if (!v.is_number_unsigned()) throw FormatError("model JSON: support_index must hold indices");
            m.support_index.push_back(v.get<std::size_t>());
        }
    }
    m.bias = require_number(doc, "bias");
    const json& converged = require(doc, "converged", "");
    if (!converged.is_boolean()) {
        throw FormatError("model JSON: field 'converged' must be a boolean");
    }
    m.converged = converged.get<bool>();
    if (doc.contains("iterations") && doc["iterations"].is_number_unsigned()) {
        m.iterations = doc["iterations"].get<std::size_t>();
    }
    if (doc.contains("kkt_violation") && doc["kkt_violation"].is_number()) {
        m.kkt_violation = doc["kkt_violation"].get<double>();
    }
    return m;
}

}  // namespace epialign::regress
