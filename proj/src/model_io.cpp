#include "kgbayes/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "kgbayes/errors.hpp"

namespace kgbayes {

namespace {

constexpr int kModelVersion = 1;

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
    return out;
}

std::string num_array(const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += num(v[i]);
    }
    out += ']';
    return out;
}

std::string str_array(const std::vector<std::string>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += quoted(v[i]);
    }
    out += ']';
    return out;
}

std::string mbnb_body(const MbnbParams& m) {
    std::string out = "{";
    out += "\"version\":" + std::to_string(kModelVersion);
    out += ",\"kind\":\"mbnb\"";
    out += ",\"alpha\":" + num(m.alpha);
    out += ",\"pi\":" + num(m.pi);
    out += ",\"p1\":" + num_array(m.p1);
    out += ",\"p0\":" + num_array(m.p0);
    out += ",\"feature_names\":" + str_array(m.feature_names);
    out += '}';
    return out;
}

std::string mixture_body(const MixtureParams& m) {
    std::string out = "{";
    out += "\"version\":" + std::to_string(kModelVersion);
    out += ",\"kind\":\"mixture\"";
    out += ",\"K\":" + std::to_string(m.components());
    out += ",\"mu\":" + num_array(m.mu);
    out += ",\"P\":[";
    for (int c = 0; c < m.components(); ++c) {
        if (c) out += ',';
        out += num_array(m.p[c]);
    }
    out += ']';
    out += ",\"feature_names\":" + str_array(m.feature_names);
    out += '}';
    return out;
}

std::string hbm_body(const HbmModel& h) {
    std::string out = "{";
    out += "\"version\":" + std::to_string(kModelVersion);
    out += ",\"kind\":\"hbm\"";
    out += ",\"variant\":";
    out += h.variant == HbmVariant::Pipeline ? "\"pipeline\"" : "\"class_conditional\"";
    out += ",\"top\":" + mbnb_body(h.top);
    if (h.variant == HbmVariant::Pipeline) {
        if (!h.mixture) throw DataError("pipeline model missing its mixture tier");
        out += ",\"mixture\":" + mixture_body(*h.mixture);
    } else {
        if (!h.class_mixtures) throw DataError("class-conditional model missing its mixtures");
        out += ",\"class_mixtures\":{\"pos\":" + mixture_body(h.class_mixtures->first) +
               ",\"neg\":" + mixture_body(h.class_mixtures->second) + '}';
    }
    out += '}';
    return out;
}

using json = nlohmann::json;

bool inside_unit(double v) { return v > 0.0 && v < 1.0; }

MbnbParams mbnb_from(const json& j) {
    MbnbParams m;
    m.alpha = j.at("alpha").get<double>();
    m.pi = j.at("pi").get<double>();
    m.p1 = j.at("p1").get<std::vector<double>>();
    m.p0 = j.at("p0").get<std::vector<double>>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    if (m.p0.size() != m.p1.size() || m.feature_names.size() != m.p1.size())
        throw ParseError("inconsistent mbnb vector lengths");
    if (!inside_unit(m.pi) || m.alpha < 0.0) throw ParseError("mbnb parameters out of range");
    for (std::size_t i = 0; i < m.p1.size(); ++i)
        if (!inside_unit(m.p1[i]) || !inside_unit(m.p0[i]))
            throw ParseError("mbnb parameters out of range");
    return m;
}

MixtureParams mixture_from(const json& j) {
    MixtureParams m;
    m.mu = j.at("mu").get<std::vector<double>>();
    m.p = j.at("P").get<std::vector<std::vector<double>>>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    if (m.mu.empty()) throw ParseError("mixture needs at least one component");
    if (m.p.size() != m.mu.size()) throw ParseError("inconsistent mixture component count");
    double mu_sum = 0.0;
    for (double w : m.mu) {
        if (!inside_unit(w) && w != 1.0) throw ParseError("mixture weights out of range");
        mu_sum += w;
    }
    if (std::fabs(mu_sum - 1.0) > 1e-9) throw ParseError("mixture weights do not sum to 1");
    for (const auto& row : m.p) {
        if (row.size() != m.p[0].size()) throw ParseError("ragged mixture matrix");
        for (double v : row)
            if (!inside_unit(v)) throw ParseError("mixture parameters out of range");
    }
    return m;
}

HbmModel hbm_from(const json& j) {
    HbmModel h;
    std::string variant = j.at("variant").get<std::string>();
    if (variant == "pipeline")
        h.variant = HbmVariant::Pipeline;
    else if (variant == "class_conditional")
        h.variant = HbmVariant::ClassConditional;
    else
        throw ParseError("unknown hbm variant '" + variant + "'");
    h.top = mbnb_from(j.at("top"));
    if (h.variant == HbmVariant::Pipeline) {
        h.mixture = mixture_from(j.at("mixture"));
        if (h.mixture->dims() != h.top.dims())
            throw ParseError("mixture and top tier disagree on dimension");
    } else {
        const json& cm = j.at("class_mixtures");
        h.class_mixtures = std::make_pair(mixture_from(cm.at("pos")), mixture_from(cm.at("neg")));
        if (h.class_mixtures->first.dims() != h.top.dims() ||
            h.class_mixtures->second.dims() != h.top.dims() ||
            h.class_mixtures->first.components() != h.class_mixtures->second.components())
            throw ParseError("class mixtures disagree on shape");
    }
    return h;
}

}  // namespace

void save_model(const MbnbParams& m, std::ostream& out) { out << mbnb_body(m) << '\n'; }
void save_model(const MixtureParams& m, std::ostream& out) { out << mixture_body(m) << '\n'; }
void save_model(const HbmModel& h, std::ostream& out) { out << hbm_body(h) << '\n'; }

AnyModel load_model(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(std::string("model file: ") + e.what());
    }
    try {
        int version = j.at("version").get<int>();
        if (version != kModelVersion)
            throw ParseError("unsupported model version " + std::to_string(version));
        std::string kind = j.at("kind").get<std::string>();
        if (kind == "mbnb") return mbnb_from(j);
        if (kind == "mixture") return mixture_from(j);
        if (kind == "hbm") return hbm_from(j);
        throw ParseError("unknown model kind '" + kind + "'");
    } catch (const json::exception& e) {
        throw ParseError(std::string("model file: ") + e.what());
    }
}

AnyModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return load_model(in);
}

void save_model_file(const AnyModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path + " for writing");
    std::visit([&](const auto& model) { save_model(model, out); }, m);
}

}  // namespace kgbayes
