#include "rdfm/scenario.hpp"

#include <cctype>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace rdfm {

std::string_view to_string(SegmentKind kind)
{
    return kind == SegmentKind::Fracture ? "fracture" : "barrier";
}

std::string_view to_string(Side side)
{
    switch (side) {
    case Side::Left: return "left";
    case Side::Right: return "right";
    case Side::Bottom: return "bottom";
    case Side::Top: return "top";
    }
    return "?";
}

bool Domain::contains(const Vec2& p, double tol) const
{
    const double scale = std::max(width(), height());
    const double t = tol * scale;
    return p.x() >= x0 - t && p.x() <= x1 + t && p.y() >= y0 - t && p.y() <= y1 + t;
}

double PenaltySchedule::alpha(double h) const { return alpha_coeff * std::pow(h, -alpha_exp); }
double PenaltySchedule::beta(double h) const { return beta_coeff * std::pow(h, -beta_exp); }

bool Scenario::has_fractures() const
{
    for (const auto& s : segments)
        if (s.kind == SegmentKind::Fracture) return true;
    return false;
}

bool Scenario::has_barriers() const
{
    for (const auto& s : segments)
        if (s.kind == SegmentKind::Barrier) return true;
    return false;
}

PenaltySchedule Scenario::effective_penalties() const
{
    if (penalties) return *penalties;
    PenaltySchedule p;
    p.alpha_coeff = 1.0;
    p.alpha_exp = has_fractures() ? 3.0 : 1.0;
    p.beta_coeff = 1.0;
    p.beta_exp = 1.0;
    return p;
}

bool Scenario::operator==(const Scenario& o) const
{
    return domain == o.domain && matrix_perm == o.matrix_perm && source == o.source && mesh == o.mesh &&
           segments == o.segments && boundary == o.boundary && penalties == o.penalties &&
           transport == o.transport;
}

namespace {

std::string trim(std::string_view s)
{
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string lower(std::string s)
{
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::vector<std::string> split_ws(const std::string& s)
{
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

[[noreturn]] void fail_line(int line, const std::string& what)
{
    throw ScenarioError("line " + std::to_string(line) + ": " + what);
}

double to_double(const std::string& s, int line, const std::string& field)
{
    // strtod accepts the same spellings the serializer emits (%.17g)
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || errno == ERANGE)
        fail_line(line, "field '" + field + "': expected a number, got '" + s + "'");
    return v;
}

int to_int(const std::string& s, int line, const std::string& field)
{
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        fail_line(line, "field '" + field + "': expected an integer, got '" + s + "'");
    return v;
}

struct KeyValues {
    std::map<std::string, std::pair<std::string, int>> values;  // key -> (value, line)

    bool has(const std::string& key) const { return values.count(key) != 0; }
};

const std::set<std::string>& allowed_keys(const std::string& section)
{
    static const std::map<std::string, std::set<std::string>> keys = {
        {"domain", {"x0", "y0", "x1", "y1"}},
        {"matrix", {"kxx", "kxy", "kyy", "source"}},
        {"mesh", {"nx", "ny", "order", "align_tol", "perturb"}},
        {"boundary", {"left", "right", "top", "bottom"}},
        {"penalty", {"alpha_coeff", "alpha_exp", "beta_coeff", "beta_exp"}},
        {"transport", {"phi", "d0", "c_in", "c_inject", "c0", "cfl", "end_pvi", "snapshots"}},
    };
    static const std::set<std::string> none;
    auto it = keys.find(section);
    return it == keys.end() ? none : it->second;
}

BoundaryCondition parse_bc(const std::string& text, int line, const std::string& field)
{
    const auto parts = split_ws(text);
    if (parts.size() != 2) fail_line(line, "field '" + field + "': expected 'dirichlet <v>' or 'neumann <v>'");
    BoundaryCondition bc;
    const auto kind = lower(parts[0]);
    if (kind == "dirichlet")
        bc.type = BoundaryType::Dirichlet;
    else if (kind == "neumann")
        bc.type = BoundaryType::Neumann;
    else
        fail_line(line, "field '" + field + "': unknown boundary type '" + parts[0] + "'");
    bc.value = to_double(parts[1], line, field);
    return bc;
}

Segment parse_segment(const std::string& text, int line)
{
    const auto parts = split_ws(text);
    if (parts.size() != 7 && parts.size() != 8)
        fail_line(line, "segment row needs 'kind x1 y1 x2 y2 thickness perm [priority]'");
    Segment s;
    const auto kind = lower(parts[0]);
    if (kind == "fracture")
        s.kind = SegmentKind::Fracture;
    else if (kind == "barrier")
        s.kind = SegmentKind::Barrier;
    else
        fail_line(line, "segment kind must be 'fracture' or 'barrier', got '" + parts[0] + "'");
    s.a = Vec2(to_double(parts[1], line, "x1"), to_double(parts[2], line, "y1"));
    s.b = Vec2(to_double(parts[3], line, "x2"), to_double(parts[4], line, "y2"));
    s.thickness = to_double(parts[5], line, "thickness");
    s.perm = to_double(parts[6], line, "perm");
    if (parts.size() == 8) s.priority = to_int(parts[7], line, "priority");
    return s;
}

std::vector<double> parse_list(const std::string& text, int line, const std::string& field)
{
    std::vector<double> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(to_double(item, line, field));
    }
    return out;
}

}  // namespace

void validate(Scenario& sc)
{
    const auto& d = sc.domain;
    if (!(d.x1 > d.x0) || !(d.y1 > d.y0)) throw ScenarioError("domain: area must be positive");

    const Mat2& K = sc.matrix_perm;
    if (std::abs(K(0, 1) - K(1, 0)) > 1e-14 * K.norm()) throw ScenarioError("matrix: permeability must be symmetric");
    if (!(K(0, 0) > 0.0) || !(K.determinant() > 0.0))
        throw ScenarioError("matrix: permeability must be positive definite");

    if (sc.mesh.nx < 1 || sc.mesh.ny < 1) throw ScenarioError("mesh: nx and ny must be >= 1");
    if (sc.mesh.order < 0) throw ScenarioError("mesh: order must be >= 0");
    if (!(sc.mesh.align_tol >= 0.0)) throw ScenarioError("mesh: align_tol must be >= 0");
    if (!(sc.mesh.perturb >= 0.0)) throw ScenarioError("mesh: perturb must be >= 0");

    for (std::size_t i = 0; i < sc.segments.size(); ++i) {
        const auto& s = sc.segments[i];
        const std::string tag = "segments[" + std::to_string(i) + "]";
        if (!s.a.allFinite() || !s.b.allFinite()) throw ScenarioError(tag + ": non-finite endpoint");
        if (!(s.length() > 0.0)) throw ScenarioError(tag + ": endpoints must be distinct");
        if (!(s.thickness > 0.0)) throw ScenarioError(tag + ": thickness must be positive");
        if (s.kind == SegmentKind::Barrier && s.perm == 0.0)
            throw ScenarioError(tag + ": impermeable barriers unsupported (k_eps = 0 cannot be represented by a "
                                      "finite resistance; use a small positive permeability)");
        if (!(s.perm > 0.0)) throw ScenarioError(tag + ": perm must be positive");
        if (!d.contains(s.a) || !d.contains(s.b)) throw ScenarioError(tag + ": segment leaves the domain");
    }

    if (sc.penalties) {
        const auto& p = *sc.penalties;
        if (!(p.alpha_coeff > 0.0) || !(p.beta_coeff > 0.0))
            throw ScenarioError("penalty: alpha_coeff and beta_coeff must be positive");
        if (!std::isfinite(p.alpha_exp) || !std::isfinite(p.beta_exp))
            throw ScenarioError("penalty: exponents must be finite");
    }

    if (sc.transport) {
        const auto& t = *sc.transport;
        if (!(t.phi > 0.0 && t.phi <= 1.0)) throw ScenarioError("transport: phi must lie in (0,1]");
        if (!(t.d0 >= 0.0)) throw ScenarioError("transport: d0 must be >= 0");
        if (!(t.cfl > 0.0 && t.cfl < 1.0)) throw ScenarioError("transport: cfl must lie in (0,1)");
        if (!(t.end_pvi > 0.0)) throw ScenarioError("transport: end_pvi must be positive");
        for (double s : t.snapshots)
            if (!(s > 0.0)) throw ScenarioError("transport: snapshots must be positive");
    }

    sc.notes.clear();
    bool any_dirichlet = false;
    for (const auto& bc : sc.boundary) any_dirichlet = any_dirichlet || bc.type == BoundaryType::Dirichlet;
    if (!any_dirichlet)
        sc.notes.push_back("pure Neumann problem: pressure is defined up to a constant and the boundary fluxes "
                           "must balance the source; the LDG system is singular");
}

Scenario parse_scenario(std::string_view text)
{
    Scenario sc;
    std::map<std::string, KeyValues> sections;
    std::set<std::string> seen_sections;
    std::vector<std::pair<std::string, int>> segment_rows;

    std::string section;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = trim(raw);
        if (s.empty() || s[0] == '#') continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail_line(line, "unterminated section header");
            section = lower(trim(std::string_view(s).substr(1, s.size() - 2)));
            if (section != "segments" && allowed_keys(section).empty())
                fail_line(line, "unknown section '" + section + "'");
            if (!seen_sections.insert(section).second) fail_line(line, "duplicate section '" + section + "'");
            continue;
        }
        if (section.empty()) fail_line(line, "content before the first section header");
        if (section == "segments") {
            segment_rows.emplace_back(s, line);
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) fail_line(line, "expected 'key = value'");
        const std::string key = lower(trim(std::string_view(s).substr(0, eq)));
        const std::string value = trim(std::string_view(s).substr(eq + 1));
        if (!allowed_keys(section).count(key)) fail_line(line, "unknown key '" + key + "' in [" + section + "]");
        if (value.empty()) fail_line(line, "empty value for '" + key + "'");
        if (!sections[section].values.emplace(key, std::make_pair(value, line)).second)
            fail_line(line, "duplicate key '" + key + "'");
    }

    auto get = [&](const std::string& sec, const std::string& key, auto assign) {
        auto sit = sections.find(sec);
        if (sit == sections.end()) return false;
        auto kit = sit->second.values.find(key);
        if (kit == sit->second.values.end()) return false;
        assign(kit->second.first, kit->second.second, sec + "." + key);
        return true;
    };
    auto num = [&](const std::string& sec, const std::string& key, double& target) {
        return get(sec, key, [&](const std::string& v, int l, const std::string& f) { target = to_double(v, l, f); });
    };
    auto integer = [&](const std::string& sec, const std::string& key, int& target) {
        return get(sec, key, [&](const std::string& v, int l, const std::string& f) { target = to_int(v, l, f); });
    };
    auto require = [&](const std::string& sec, const std::string& key, double& target) {
        if (!num(sec, key, target)) throw ScenarioError("missing required field '" + sec + "." + key + "'");
    };

    if (!seen_sections.count("domain")) throw ScenarioError("missing required section [domain]");
    require("domain", "x0", sc.domain.x0);
    require("domain", "y0", sc.domain.y0);
    require("domain", "x1", sc.domain.x1);
    require("domain", "y1", sc.domain.y1);

    double kxx = 1.0, kxy = 0.0, kyy = 1.0;
    num("matrix", "kxx", kxx);
    num("matrix", "kxy", kxy);
    num("matrix", "kyy", kyy);
    sc.matrix_perm << kxx, kxy, kxy, kyy;
    num("matrix", "source", sc.source);

    integer("mesh", "nx", sc.mesh.nx);
    integer("mesh", "ny", sc.mesh.ny);
    integer("mesh", "order", sc.mesh.order);
    num("mesh", "align_tol", sc.mesh.align_tol);
    num("mesh", "perturb", sc.mesh.perturb);

    for (const auto& [row, l] : segment_rows) sc.segments.push_back(parse_segment(row, l));

    if (!seen_sections.count("boundary")) throw ScenarioError("missing required section [boundary]");
    for (Side side : {Side::Left, Side::Right, Side::Bottom, Side::Top}) {
        const std::string key(to_string(side));
        if (!get("boundary", key,
                 [&](const std::string& v, int l, const std::string& f) { sc.bc(side) = parse_bc(v, l, f); }))
            throw ScenarioError("missing required field 'boundary." + key + "'");
    }

    if (seen_sections.count("penalty")) {
        PenaltySchedule p;
        require("penalty", "alpha_coeff", p.alpha_coeff);
        require("penalty", "alpha_exp", p.alpha_exp);
        require("penalty", "beta_coeff", p.beta_coeff);
        require("penalty", "beta_exp", p.beta_exp);
        sc.penalties = p;
    }

    if (seen_sections.count("transport")) {
        TransportParams t;
        num("transport", "phi", t.phi);
        num("transport", "d0", t.d0);
        num("transport", "c_in", t.c_in);
        num("transport", "c_inject", t.c_inject);
        num("transport", "c0", t.c0);
        num("transport", "cfl", t.cfl);
        num("transport", "end_pvi", t.end_pvi);
        get("transport", "snapshots",
            [&](const std::string& v, int l, const std::string& f) { t.snapshots = parse_list(v, l, f); });
        sc.transport = t;
    }

    validate(sc);
    return sc;
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_scenario(buf.str());
    } catch (const ScenarioError& e) {
        throw ScenarioError(path + ": " + e.what());
    }
}

std::string serialize_scenario(const Scenario& sc)
{
    std::ostringstream out;
    out << std::setprecision(17);
    const auto& d = sc.domain;
    out << "[domain]\nx0 = " << d.x0 << "\ny0 = " << d.y0 << "\nx1 = " << d.x1 << "\ny1 = " << d.y1 << "\n\n";
    out << "[matrix]\nkxx = " << sc.matrix_perm(0, 0) << "\nkxy = " << sc.matrix_perm(0, 1)
        << "\nkyy = " << sc.matrix_perm(1, 1) << "\nsource = " << sc.source << "\n\n";
    out << "[mesh]\nnx = " << sc.mesh.nx << "\nny = " << sc.mesh.ny << "\norder = " << sc.mesh.order
        << "\nalign_tol = " << sc.mesh.align_tol << "\nperturb = " << sc.mesh.perturb << "\n\n";
    out << "[segments]\n";
    for (const auto& s : sc.segments)
        out << to_string(s.kind) << ' ' << s.a.x() << ' ' << s.a.y() << ' ' << s.b.x() << ' ' << s.b.y() << ' '
            << s.thickness << ' ' << s.perm << ' ' << s.priority << '\n';
    out << "\n[boundary]\n";
    for (Side side : {Side::Left, Side::Right, Side::Bottom, Side::Top}) {
        const auto& bc = sc.bc(side);
        out << to_string(side) << " = " << (bc.type == BoundaryType::Dirichlet ? "dirichlet " : "neumann ")
            << bc.value << '\n';
    }
    if (sc.penalties) {
        const auto& p = *sc.penalties;
        out << "\n[penalty]\nalpha_coeff = " << p.alpha_coeff << "\nalpha_exp = " << p.alpha_exp
            << "\nbeta_coeff = " << p.beta_coeff << "\nbeta_exp = " << p.beta_exp << '\n';
    }
    if (sc.transport) {
        const auto& t = *sc.transport;
        out << "\n[transport]\nphi = " << t.phi << "\nd0 = " << t.d0 << "\nc_in = " << t.c_in
            << "\nc_inject = " << t.c_inject << "\nc0 = " << t.c0 << "\ncfl = " << t.cfl << "\nend_pvi = " << t.end_pvi
            << '\n';
        if (!t.snapshots.empty()) {
            out << "snapshots = ";
            for (std::size_t i = 0; i < t.snapshots.size(); ++i) out << (i ? "," : "") << t.snapshots[i];
            out << '\n';
        }
    }
    return out.str();
}

}  // namespace rdfm
