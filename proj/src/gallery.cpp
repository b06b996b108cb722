#include "lwr/gallery.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lwr {

using nlohmann::json;

// --- generators ------------------------------------------------------------------

static LambdaSet make_set(std::initializer_list<cplx> lambdas) {
    LambdaSet s;
    for (cplx l : lambdas) {
        bool dup = false;
        for (cplx e : s.lambdas)
            if (std::abs(e - l) < 1e-14) dup = true;
        if (!dup) {
            s.lambdas.push_back(l);
            s.with_derivative.push_back(true);
        }
    }
    return s;
}

GalleryData make_enneper(const EnneperSpec& spec, Target target) {
    if (!(spec.r > 0) || spec.n < 0) throw Error("BadSpec", "enneper needs r > 0, n >= 0");
    GalleryData gd;
    gd.name = "enneper";
    gd.target = target;
    gd.xi.A = {Entry::zero(), Entry::zero(), Entry::constant(1), Entry::zero()};
    gd.xi.B = {Entry::zero(), Entry::monomial(spec.r, double(spec.n)), Entry::zero(),
               Entry::zero()};
    gd.xi.domain = Domain::Plane;
    gd.ev = (target == Target::E3) ? EvaluationPair(0, 1) : EvaluationPair(1, 0);
    gd.init = InitialData::constant(0.0, make_set({gd.ev.lambda0, gd.ev.lambda1}),
                                    Mat2::identity());
    gd.init.logz0 = 0;  // potential is entire; log never used
    return gd;
}

GalleryData make_catenoid(const CatenoidSpec& spec) {
    if (!(spec.p > 0) || spec.q == 0) throw Error("BadSpec", "catenoid needs p > 0, q != 0");
    if (spec.target == Target::H3 && !(spec.p + spec.q > 0))
        throw Error("BadWeights", "H3 catenoid needs p + q > 0");
    GalleryData gd;
    gd.name = "catenoid";
    gd.target = spec.target;
    gd.xi.A = {Entry::zero(), Entry::zero(), Entry::monomial(spec.q, -1.0), Entry::zero()};
    gd.xi.B = {Entry::zero(), Entry::monomial(1.0, -1.0), Entry::monomial(spec.p, -1.0),
               Entry::zero()};
    gd.xi.poles = {0.0};
    gd.xi.domain = Domain::PuncturedPlane;
    gd.ev = EvaluationPair(0, 1);
    double mu = std::sqrt(spec.target == Target::E3 ? spec.p : spec.p + spec.q);
    cplx s = 1.0 / std::sqrt(2.0);
    Mat2 c{s, s / mu, -s * mu, s};
    gd.init = InitialData::constant(1.0, make_set({gd.ev.lambda0, gd.ev.lambda1}), c);
    gd.loops.push_back(PathSpec::circle(0.0, 1.0, 1.0, 0.0));
    return gd;
}

GalleryData make_revolution(const RevolutionSpec& spec) {
    if (!(spec.a > 0 && spec.b > 0) || !(spec.alpha < spec.beta))
        throw Error("BadSpec", "revolution needs a,b > 0 and alpha < beta");
    GalleryData gd;
    gd.name = "revolution";
    gd.target = spec.target;
    const double a = spec.a, b = spec.b, al = spec.alpha, be = spec.beta;
    // xi = lambda x x^perp dz with x = (a z^alpha, b z^beta)
    gd.xi.A = {Entry::monomial(-a * b, al + be), Entry::monomial(a * a, 2 * al),
               Entry::monomial(-b * b, 2 * be), Entry::monomial(a * b, al + be)};
    gd.xi.B = MatEntry::zero();
    gd.xi.poles = {0.0};
    gd.xi.domain = Domain::PuncturedPlane;
    cplx einu = std::exp(cplx(0, spec.nu));
    gd.ev = (spec.target == Target::E3) ? EvaluationPair(0.0, einu) : EvaluationPair(-einu, 0.0);
    gd.init = InitialData::constant(1.0, make_set({gd.ev.lambda0, gd.ev.lambda1}),
                                    Mat2::identity());
    return gd;
}

cplx TrinoidSpec::delta() const {
    const cplx q0 = weights[0], q1 = weights[1], q2 = weights[2];
    return q0 * q0 + q1 * q1 + q2 * q2 - 2.0 * q0 * q1 - 2.0 * q0 * q2 - 2.0 * q1 * q2;
}

std::array<cplx, 2> TrinoidSpec::hopf_zeros() const {
    // numerator q0 + (q1-q0-q2) z + q2 z^2
    const cplx q0 = weights[0], q1 = weights[1], q2 = weights[2];
    cplx bb = q1 - q0 - q2;
    cplx disc = std::sqrt(bb * bb - 4.0 * q2 * q0);
    cplx u0 = (-bb + disc) / (2.0 * q2);
    cplx u1 = (-bb - disc) / (2.0 * q2);
    return {u0, u1};
}

static PathSpec loop_around(cplx z0, cplx center, double radius) {
    cplx dir = (z0 - center) / std::abs(z0 - center);
    cplx start = center + radius * dir;
    double theta = std::arg(dir);
    PathSpec p = PathSpec::line(z0, start);
    p.append(PathSpec::circle(center, radius, 1.0, theta));
    p.append(PathSpec::line(start, z0));
    return p;
}

static PathSpec concat_reversed(const PathSpec& a, const PathSpec& b) {
    PathSpec fwd = a;
    fwd.append(b);
    return fwd.reversed();
}

GalleryData make_trinoid(const TrinoidSpec& spec, Target target, const SolverSettings& s) {
    cplx d = spec.delta();
    if (std::abs(d) < 1e-12) throw Error("DegenerateWeights", "delta(q0,q1,q2) = 0");
    if (std::abs(spec.weights[2]) < 1e-12)
        throw Error("DegenerateWeights", "weight at infinity vanishes");

    // admissibility before any integration
    if (target == Target::E3) {
        double a[3];
        for (int k = 0; k < 3; ++k) {
            if (std::abs(spec.weights[k].imag()) > 1e-12)
                throw Error("NotUnitarizable", "E3 trinoid weights must be real");
            a[k] = std::abs(spec.weights[k].real());
        }
        if (!(a[0] < a[1] + a[2] && a[1] < a[0] + a[2] && a[2] < a[0] + a[1]))
            throw Error("NotUnitarizable", "weights violate the Euclidean triangle inequalities");
    } else {
        double nu[3];
        for (int k = 0; k < 3; ++k) {
            cplx w = spec.weights[k] + 0.25;
            if (std::abs(spec.weights[k].imag()) > 1e-12 || w.real() < 0)
                throw Error("NotUnitarizable", "H3 trinoid needs real weights >= -1/4");
            double v = std::abs(0.5 - std::sqrt(w.real()));
            v = v - std::floor(v);
            if (v > 0.5) v = 1.0 - v;
            nu[k] = v;
        }
        if (!(nu[0] < nu[1] + nu[2] && nu[1] < nu[0] + nu[2] && nu[2] < nu[0] + nu[1] &&
              nu[0] + nu[1] + nu[2] < 1.0))
            throw Error("NotUnitarizable", "log-eigenvalues violate the spherical inequalities");
    }

    auto zeros = spec.hopf_zeros();
    GalleryData gd;
    gd.name = "trinoid";
    gd.target = target;
    // Q = (q0 + (q1-q0-q2) z + q2 z^2) / (z^2 (z-1)^2)
    Poly qnum({spec.weights[0], spec.weights[1] - spec.weights[0] - spec.weights[2],
               spec.weights[2]});
    Poly zsq({0, 0, 1});
    Poly zm1({-1, 1});
    Entry Q = Entry::rational(qnum, zsq * (zm1 * zm1));
    // S = (3/4)(u1-u0)^2 / ((z-u0)^2 (z-u1)^2)
    cplx du = zeros[1] - zeros[0];
    Poly p0({-zeros[0], 1}), p1({-zeros[1], 1});
    Entry S = Entry::rational(Poly({0.75 * du * du}), (p0 * p0) * (p1 * p1));
    gd.xi.A = {Entry::zero(), Entry::zero(), Q, Entry::zero()};
    gd.xi.B = {Entry::zero(), Entry::constant(1), S, Entry::zero()};
    gd.xi.poles = {0.0, 1.0, zeros[0], zeros[1]};
    gd.xi.domain = Domain::PuncturedSphere;
    gd.ev = EvaluationPair(0, 1);

    const cplx z0 = 0.5;
    LambdaSet set = make_set({0.0, 1.0});
    InitialData plain = InitialData::constant(z0, set, Mat2::identity());

    PathSpec g0 = loop_around(z0, 0.0, 0.25);
    PathSpec g1 = loop_around(z0, 1.0, 0.25);
    MonodromySample m0 = monodromy(gd.xi, g0, plain, s);
    MonodromySample m1 = monodromy(gd.xi, g1, plain, s);
    m0.loop_id = 0;
    m1.loop_id = 1;

    Mat2 C;
    if (target == Target::E3) {
        auto sign_of = [](const Mat2& m) {
            return (m.tr().real() >= 0) ? 1.0 : -1.0;
        };
        Mat2 A0 = sign_of(m0.at(0.0)) * m0.dot_at(0.0);
        Mat2 A1 = sign_of(m1.at(0.0)) * m1.dot_at(0.0);
        Mat2 A2 = -(A0 + A1);
        UnitarizeResult u = unitarize_sl2c(A0, A1, A2);
        if (u.cls != TripleClass::IrreducibleUnitarizable || !u.unitarizer)
            throw Error("NotUnitarizable", "monodromy derivative triple is not unitarizable");
        C = *u.unitarizer;
    } else {
        Mat2 M0 = m0.at(1.0), M1 = m1.at(1.0);
        Mat2 M2 = (M0 * M1).inv();
        UnitarizeResult u = unitarize_sl2C_group(M0, M1, M2);
        if (u.cls != TripleClass::IrreducibleUnitarizable || !u.unitarizer)
            throw Error("NotUnitarizable", "monodromy triple at lambda1 is not unitarizable");
        C = *u.unitarizer;
    }

    gd.init = InitialData::constant(z0, set, C);
    gd.loops.push_back(g0);
    gd.loops.push_back(g1);
    gd.loops.push_back(concat_reversed(g0, g1));  // a loop around infinity
    return gd;
}

GalleryData make_dressed_catenoid(const DressedCatenoidSpec& spec) {
    if (!(spec.u > 0) || spec.u == 1.0)
        throw Error("BadSpec", "dressing parameter needs u > 0, u != 1");
    GalleryData gd = make_catenoid(spec.base);
    gd.name = "dressed_catenoid";
    cplx alpha = spec.alpha();
    if (std::abs(alpha) < 1e-12 || std::abs(alpha - 1.0) < 1e-12)
        throw Error("AlphaAtEvaluation", "alpha collides with an evaluation point");
    LambdaSet set = make_set({gd.ev.lambda0, gd.ev.lambda1, alpha});
    gd.init = InitialData::constant(gd.init.z0, set, gd.init.C[0]);
    SimpleFactorSpec sf{alpha, spec.ell, orthogonal_line(spec.ell)};
    gd.dressing = sf;

    // singular points: z^{2 mu_a} = Z with
    // Z = (l1 mu_c (mu_c + mu_a) + l2 (mu_c - mu_a)) /
    //     (l1 mu_c (mu_c - mu_a) + l2 (mu_c + mu_a))
    double p = spec.base.p, q = spec.base.q;
    double mu_c = std::sqrt(spec.base.target == Target::E3 ? p : p + q);
    double mu_a = spec.u * std::sqrt(p);
    cplx l1 = spec.ell.u, l2 = spec.ell.v;
    cplx Z = (l1 * mu_c * (mu_c + mu_a) + l2 * (mu_c - mu_a)) /
             (l1 * mu_c * (mu_c - mu_a) + l2 * (mu_c + mu_a));
    double e = 2.0 * mu_a;
    double rho = std::pow(std::abs(Z), 1.0 / e);
    double th0 = std::arg(Z) / e;
    // all solutions with argument in [0, 2 pi)
    for (int k = -(int)std::ceil(e) - 1; k <= (int)std::ceil(e) + 1; ++k) {
        double th = th0 + 2.0 * M_PI * k / e;
        if (th >= -1e-12 && th < 2.0 * M_PI - 1e-12)
            gd.predicted_singularities.push_back(rho * std::exp(cplx(0, th)));
    }
    return gd;
}

double enneper_metric(const EnneperSpec& s, cplx z) {
    double r2 = std::pow(std::abs(z), 2.0 * s.n + 2.0);
    double t = 1.0 + s.r * s.r * r2 / ((s.n + 1.0) * (s.n + 1.0));
    return t * t;
}

double catenoid_metric(const CatenoidSpec& s, cplx z) {
    double mu = std::sqrt(s.target == Target::E3 ? s.p : s.p + s.q);
    double r = std::abs(z);
    double t = std::pow(r, 2.0 * mu) / mu + mu * std::pow(r, -2.0 * mu);
    return s.q * s.q / (4.0 * mu * mu) * t * t / (r * r);
}

double revolution_metric(const RevolutionSpec& s, cplx z) {
    double r = std::abs(z);
    double t = s.a * s.a * std::pow(r, 2 * s.alpha) + s.b * s.b * std::pow(r, 2 * s.beta);
    return t * t;
}

cplx enneper_hopf(const EnneperSpec& s, const EvaluationPair& ev, cplx z) {
    return ev.delta() * s.r * std::pow(z, s.n);
}

cplx catenoid_hopf(const CatenoidSpec& s, cplx z) { return s.q / (z * z); }

cplx revolution_hopf(const RevolutionSpec& s, cplx z) {
    return std::exp(cplx(0, s.nu)) * s.a * s.b * (s.beta - s.alpha) *
           std::pow(z, s.alpha + s.beta - 1.0);
}

// --- entry parser ------------------------------------------------------------------

namespace {

struct EntryLexer {
    std::string s;
    size_t i = 0;
    void skip() {
        while (i < s.size() && std::isspace((unsigned char)s[i])) ++i;
    }
    bool eof() {
        skip();
        return i >= s.size();
    }
    char peek() {
        skip();
        return i < s.size() ? s[i] : '\0';
    }
    char get() {
        skip();
        return s[i++];
    }
    bool accept(char c) {
        if (peek() == c) {
            ++i;
            return true;
        }
        return false;
    }
    double number() {
        skip();
        size_t start = i;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
        bool digits = false;
        while (i < s.size() && (std::isdigit((unsigned char)s[i]) || s[i] == '.')) {
            ++i;
            digits = true;
        }
        if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
            size_t save = i++;
            if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
            if (i < s.size() && std::isdigit((unsigned char)s[i])) {
                while (i < s.size() && std::isdigit((unsigned char)s[i])) ++i;
            } else {
                i = save;
            }
        }
        if (!digits) throw Error("ParseError", "expected a number in '" + s + "'");
        return std::strtod(s.substr(start, i - start).c_str(), nullptr);
    }
};

// factor := number ['i'] | 'i' | 'z' ['^' number] | '(' re (+|-) im 'i' ')'
// term := ['-'|'+'] factor ('*' factor)*
// sum := term (('+'|'-') term)*
Term parse_term(EntryLexer& lx) {
    Term t;
    t.coeff = 1;
    t.alpha = 0;
    bool first = true;
    while (true) {
        char c = lx.peek();
        if (c == 'z') {
            lx.get();
            double e = 1;
            if (lx.accept('^')) e = lx.number();
            t.alpha += e;
        } else if (c == 'i') {
            lx.get();
            t.coeff *= I_UNIT;
        } else if (c == '(') {
            lx.get();
            double re = lx.number();
            cplx val = re;
            char op = lx.peek();
            if (op == '+' || op == '-') {
                double im = lx.number();
                if (!lx.accept('i')) throw Error("ParseError", "expected i in complex literal");
                val = cplx(re, im);
            }
            if (!lx.accept(')')) throw Error("ParseError", "expected ) in complex literal");
            t.coeff *= val;
        } else if (std::isdigit((unsigned char)c) || c == '.' ||
                   (first && (c == '+' || c == '-'))) {
            double v = lx.number();
            t.coeff *= v;
            if (lx.peek() == 'i') {
                lx.get();
                t.coeff *= I_UNIT;
            }
        } else {
            throw Error("ParseError", std::string("unexpected character '") + c + "'");
        }
        first = false;
        if (!lx.accept('*')) break;
    }
    return t;
}

std::vector<Term> parse_sum(EntryLexer& lx, char stop = '\0') {
    std::vector<Term> out;
    double sign = 1;
    if (lx.accept('+')) sign = 1;
    else if (lx.accept('-')) sign = -1;
    while (true) {
        Term t = parse_term(lx);
        t.coeff *= sign;
        out.push_back(t);
        if (lx.eof() || lx.peek() == stop) break;
        if (lx.accept('+')) sign = 1;
        else if (lx.accept('-')) sign = -1;
        else break;
    }
    return out;
}

Poly poly_of_terms(const std::vector<Term>& ts) {
    std::vector<cplx> c;
    for (const auto& t : ts) {
        double a = t.alpha;
        if (a < 0 || a != std::floor(a))
            throw Error("ParseError", "rational entries need integer powers");
        size_t k = (size_t)a;
        if (c.size() <= k) c.resize(k + 1, 0);
        c[k] += t.coeff;
    }
    return Poly(c.empty() ? std::vector<cplx>{cplx(0)} : c);
}

}  // namespace

Entry parse_entry(const std::string& text) {
    // top-level "(...)/(...)" makes a rational entry
    int depth = 0;
    size_t slash = std::string::npos;
    for (size_t k = 0; k < text.size(); ++k) {
        if (text[k] == '(') ++depth;
        if (text[k] == ')') --depth;
        if (text[k] == '/' && depth == 0) {
            slash = k;
            break;
        }
    }
    if (slash != std::string::npos) {
        auto strip_parens = [](std::string s) {
            size_t a = s.find_first_not_of(" \t");
            size_t b = s.find_last_not_of(" \t");
            s = s.substr(a, b - a + 1);
            if (s.front() == '(' && s.back() == ')') return s.substr(1, s.size() - 2);
            return s;
        };
        EntryLexer ln{strip_parens(text.substr(0, slash))};
        EntryLexer ld{strip_parens(text.substr(slash + 1))};
        Poly num = poly_of_terms(parse_sum(ln));
        Poly den = poly_of_terms(parse_sum(ld));
        if (!ln.eof() || !ld.eof()) throw Error("ParseError", "trailing input in entry");
        return Entry::rational(num, den);
    }
    EntryLexer lx{text};
    if (lx.eof()) return Entry::zero();
    std::vector<Term> ts = parse_sum(lx);
    if (!lx.eof()) throw Error("ParseError", "trailing input in entry");
    return Entry(std::move(ts));
}

// --- config ---------------------------------------------------------------------

namespace {

cplx get_cplx(const json& j, const std::string& ptr) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ConfigError(ptr, "expected a complex number as [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

double get_num(const json& j, const std::string& ptr) {
    if (!j.is_number()) throw ConfigError(ptr, "expected a number");
    return j.get<double>();
}

Mat2 get_mat(const json& j, const std::string& ptr) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_array() || j[0].size() != 2 ||
        !j[1].is_array() || j[1].size() != 2)
        throw ConfigError(ptr, "expected a 2x2 matrix of [re, im] pairs");
    return {get_cplx(j[0][0], ptr + "/0/0"), get_cplx(j[0][1], ptr + "/0/1"),
            get_cplx(j[1][0], ptr + "/1/0"), get_cplx(j[1][1], ptr + "/1/1")};
}

}  // namespace

JobConfig parse_job_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError("/", std::string("invalid JSON: ") + e.what());
    }
    JobConfig cfg;
    if (!j.contains("target")) throw ConfigError("/target", "missing field");
    std::string tgt = j["target"].get<std::string>();
    if (tgt == "E3") cfg.target = Target::E3;
    else if (tgt == "H3") cfg.target = Target::H3;
    else throw ConfigError("/target", "must be \"E3\" or \"H3\"");

    if (!j.contains("surface") || !j["surface"].is_object())
        throw ConfigError("/surface", "missing surface object");
    const json& s = j["surface"];
    if (!s.contains("type")) throw ConfigError("/surface/type", "missing field");
    cfg.surface_type = s["type"].get<std::string>();

    if (cfg.surface_type == "enneper") {
        cfg.enneper.r = s.contains("r") ? get_num(s["r"], "/surface/r") : 1.0;
        cfg.enneper.n = s.contains("n") ? (int)get_num(s["n"], "/surface/n") : 0;
    } else if (cfg.surface_type == "catenoid") {
        cfg.catenoid.p = s.contains("p") ? get_num(s["p"], "/surface/p") : 0.25;
        cfg.catenoid.q = s.contains("q") ? get_num(s["q"], "/surface/q") : 1.0;
        cfg.catenoid.target = cfg.target;
    } else if (cfg.surface_type == "revolution") {
        cfg.revolution.a = s.contains("a") ? get_num(s["a"], "/surface/a") : 1.0;
        cfg.revolution.b = s.contains("b") ? get_num(s["b"], "/surface/b") : 1.0;
        cfg.revolution.alpha = s.contains("alpha") ? get_num(s["alpha"], "/surface/alpha") : 0.0;
        cfg.revolution.beta = s.contains("beta") ? get_num(s["beta"], "/surface/beta") : 1.0;
        cfg.revolution.nu = s.contains("nu") ? get_num(s["nu"], "/surface/nu") : 0.0;
        cfg.revolution.target = cfg.target;
    } else if (cfg.surface_type == "trinoid") {
        if (!s.contains("weights") || !s["weights"].is_array() || s["weights"].size() != 3)
            throw ConfigError("/surface/weights", "expected three complex weights");
        for (int k = 0; k < 3; ++k)
            cfg.trinoid.weights[k] =
                get_cplx(s["weights"][k], "/surface/weights/" + std::to_string(k));
    } else if (cfg.surface_type == "dressed_catenoid") {
        cfg.dressed.base.p = s.contains("p") ? get_num(s["p"], "/surface/p") : 1.0;
        cfg.dressed.base.q = s.contains("q") ? get_num(s["q"], "/surface/q") : 1.0;
        cfg.dressed.base.target = cfg.target;
        cfg.dressed.u = s.contains("u") ? get_num(s["u"], "/surface/u") : 0.5;
        if (s.contains("ell")) {
            cplx e = get_cplx(s["ell"], "/surface/ell");
            cfg.dressed.ell = {e.real(), e.imag()};
        }
    } else if (cfg.surface_type == "custom") {
        if (!s.contains("A") || !s.contains("B"))
            throw ConfigError("/surface/A", "custom potential needs A and B entry matrices");
        auto mat_entries = [&](const json& m, const std::string& ptr) {
            if (!m.is_array() || m.size() != 2 || !m[0].is_array() || m[1].size() != 2)
                throw ConfigError(ptr, "expected a 2x2 matrix of entry strings");
            MatEntry out;
            out.a = parse_entry(m[0][0].get<std::string>());
            out.b = parse_entry(m[0][1].get<std::string>());
            out.c = parse_entry(m[1][0].get<std::string>());
            out.d = parse_entry(m[1][1].get<std::string>());
            return out;
        };
        Potential xi;
        xi.A = mat_entries(s["A"], "/surface/A");
        xi.B = mat_entries(s["B"], "/surface/B");
        if (s.contains("poles"))
            for (size_t k = 0; k < s["poles"].size(); ++k)
                xi.poles.push_back(get_cplx(s["poles"][k], "/surface/poles"));
        xi.domain = xi.poles.empty() ? Domain::Plane : Domain::PuncturedPlane;
        cfg.custom_xi = xi;
        if (s.contains("z0")) cfg.custom_z0 = get_cplx(s["z0"], "/surface/z0");
        if (s.contains("C")) cfg.custom_C = get_mat(s["C"], "/surface/C");
        if (s.contains("loops"))
            for (size_t k = 0; k < s["loops"].size(); ++k) {
                const json& l = s["loops"][k];
                std::string ptr = "/surface/loops/" + std::to_string(k);
                cplx center = get_cplx(l.at("center"), ptr + "/center");
                double radius = l.contains("radius") ? get_num(l["radius"], ptr + "/radius") : 0.0;
                cfg.custom_loops.push_back({center, radius});
            }
    } else {
        throw ConfigError("/surface/type", "unknown surface type " + cfg.surface_type);
    }

    if (j.contains("evaluation")) {
        const json& e = j["evaluation"];
        if (!e.contains("lambda0") || !e.contains("lambda1"))
            throw ConfigError("/evaluation", "needs lambda0 and lambda1");
        cfg.evaluation = EvaluationPair(get_cplx(e["lambda0"], "/evaluation/lambda0"),
                                        get_cplx(e["lambda1"], "/evaluation/lambda1"));
    }
    if (j.contains("grid")) {
        const json& g = j["grid"];
        std::string kind = g.value("kind", "rect");
        if (kind == "rect") {
            cplx c = g.contains("center") ? get_cplx(g["center"], "/grid/center") : cplx(0);
            double hx = g.contains("half_x") ? get_num(g["half_x"], "/grid/half_x") : 0.315;
            double hy = g.contains("half_y") ? get_num(g["half_y"], "/grid/half_y") : hx;
            int nx = g.contains("nx") ? (int)get_num(g["nx"], "/grid/nx") : 64;
            int ny = g.contains("ny") ? (int)get_num(g["ny"], "/grid/ny") : 64;
            cfg.grid = GridSpec::rect(c, hx, hy, nx, ny);
        } else if (kind == "annulus") {
            double rmin = g.contains("rmin") ? get_num(g["rmin"], "/grid/rmin") : 0.5;
            double rmax = g.contains("rmax") ? get_num(g["rmax"], "/grid/rmax") : 2.0;
            int nr = g.contains("nr") ? (int)get_num(g["nr"], "/grid/nr") : 64;
            int nt = g.contains("ntheta") ? (int)get_num(g["ntheta"], "/grid/ntheta") : 64;
            double t0 = g.contains("theta0") ? get_num(g["theta0"], "/grid/theta0") : 0.0;
            double t1 = g.contains("theta1") ? get_num(g["theta1"], "/grid/theta1")
                                             : 2.0 * M_PI;
            cfg.grid = GridSpec::annulus(rmin, rmax, nr, nt, t0, t1);
        } else {
            throw ConfigError("/grid/kind", "unknown grid kind " + kind);
        }
    }
    if (j.contains("solver")) {
        const json& g = j["solver"];
        if (g.contains("rel_tol")) cfg.solver.rel_tol = get_num(g["rel_tol"], "/solver/rel_tol");
        if (g.contains("abs_tol")) cfg.solver.abs_tol = get_num(g["abs_tol"], "/solver/abs_tol");
        if (g.contains("pole_clearance"))
            cfg.solver.pole_clearance = get_num(g["pole_clearance"], "/solver/pole_clearance");
    }
    if (j.contains("transforms")) {
        const json& ts = j["transforms"];
        for (size_t k = 0; k < ts.size(); ++k) {
            std::string ptr = "/transforms/" + std::to_string(k);
            const json& t = ts[k];
            std::string type = t.value("type", "");
            TransformStep step;
            if (type == "associated_move") {
                step.kind = TransformStep::Kind::AssociatedMove;
                step.t = get_cplx(t.at("t"), ptr + "/t");
            } else if (type == "dual_swap") {
                step.kind = TransformStep::Kind::DualSwap;
            } else if (type == "dress") {
                step.kind = TransformStep::Kind::Dress;
                step.dress_u =
                    t.contains("unitary") ? get_mat(t["unitary"], ptr + "/unitary") : Mat2::identity();
                step.dress_x =
                    t.contains("generator") ? get_mat(t["generator"], ptr + "/generator") : Mat2::zero();
            } else {
                throw ConfigError(ptr + "/type", "unknown transform " + type);
            }
            cfg.transforms.push_back(step);
        }
    }
    if (j.contains("output")) {
        cfg.obj_path = j["output"].value("obj", "");
        cfg.csv_path = j["output"].value("csv", "");
    }
    if (j.contains("checks"))
        for (const auto& c : j["checks"]) cfg.checks.push_back(c.get<std::string>());
    if (j.contains("parallel")) cfg.parallel = j["parallel"].get<bool>();
    return cfg;
}

JobConfig load_job_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("IoError", "cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_job_config(ss.str());
}

// --- job runner --------------------------------------------------------------------

namespace {

GalleryData build_gallery(const JobConfig& cfg) {
    if (cfg.surface_type == "enneper") return make_enneper(cfg.enneper, cfg.target);
    if (cfg.surface_type == "catenoid") return make_catenoid(cfg.catenoid);
    if (cfg.surface_type == "revolution") return make_revolution(cfg.revolution);
    if (cfg.surface_type == "trinoid") return make_trinoid(cfg.trinoid, cfg.target, cfg.solver);
    if (cfg.surface_type == "dressed_catenoid") return make_dressed_catenoid(cfg.dressed);
    if (cfg.surface_type != "custom" || !cfg.custom_xi)
        throw ConfigError("/surface", "unknown or incomplete surface spec");
    GalleryData gd;
    gd.name = "custom";
    gd.target = cfg.target;
    gd.xi = *cfg.custom_xi;
    gd.ev = cfg.evaluation ? *cfg.evaluation : EvaluationPair(0, 1);
    gd.init = InitialData::constant(cfg.custom_z0, make_set({gd.ev.lambda0, gd.ev.lambda1}),
                                    cfg.custom_C);
    for (const auto& [center, radius] : cfg.custom_loops) {
        double r = radius > 0 ? radius : std::max(0.1, 2.0 * cfg.solver.pole_clearance);
        gd.loops.push_back(loop_around(cfg.custom_z0, center, r));
    }
    return gd;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

struct Patch {
    GridSpec grid;
    std::vector<cplx> connector;  // polyline from the job base point; empty = direct
};

// Default grids. Trinoids get one polar patch per end (punctures 0, 1 and a
// far annulus for infinity, keep-out radius 0.06) plus a rectangular bridge;
// checks run on the bridge, which is the uniform-step patch.
std::vector<Patch> default_patches(const GalleryData& gd) {
    if (gd.name == "enneper") return {{GridSpec::rect(0.0, 0.315, 0.315, 64, 64), {}}};
    if (gd.name == "trinoid") {
        std::vector<Patch> out;
        out.push_back({GridSpec::rect(0.5, 0.2, 0.2, 48, 48), {}});
        out.push_back({GridSpec::polar_around(0.0, 0.06, 0.4, 24, 64), {}});
        out.push_back({GridSpec::polar_around(1.0, 0.06, 0.4, 24, 64, M_PI, 3.0 * M_PI), {}});
        out.push_back({GridSpec::annulus(2.5, 20.0, 24, 64),
                       {cplx(0.5), cplx(0.5, -0.6), cplx(2.5, -0.6), cplx(2.5)}});
        return out;
    }
    return {{GridSpec::annulus(0.5, 2.0, 64, 64), {}}};
}

}  // namespace

SampledSurface evaluate_dressed_surface(const Potential& xi, const GridFrames& frames,
                                        const SimpleFactorSpec& sf, const EvaluationPair& ev,
                                        Target target, bool parallel) {
    SampledSurface out{frames.grid, target, ev, {}};
    out.samples.resize(frames.nodes.size());
    int n = static_cast<int>(frames.nodes.size());
    auto work = [&](int k) {
        const FrameBundle& fb = frames.nodes[k];
        SurfaceSample& smp = out.samples[k];
        smp.z = fb.z;
        SimpleFactorDressed d = simple_factor_dress(fb, xi, sf, ev, target);
        if (d.singular) {
            smp.valid = false;
            return;
        }
        // dressed potential is lambda-affine: recover its linear part exactly
        Mat2 xi0 = sf_dressed_potential(fb, xi, sf, ev.lambda0);
        Mat2 xi1 = sf_dressed_potential(fb, xi, sf, ev.lambda1);
        Mat2 Ahat = (1.0 / ev.delta()) * (xi1 - xi0);
        Spinor2 xhat = spinor_of_nilpotent(Ahat, 1e-6);
        NullCurves nc = null_curves(d.bundle, ev);
        smp.psi = nc.psi;
        smp.Psi = nc.Psi;
        smp.position =
            (target == Target::E3) ? nc.psi + nc.psi.dagger() : nc.Psi.dagger() * nc.Psi;
        smp.metric_density = metric_density(d.bundle, ev, target, xhat);
        smp.gauss = gauss_pair(d.bundle, ev, xhat);
        smp.normal = unit_normal(d.bundle, ev, target, xhat);
        smp.normal_full =
            (target == Target::E3) ? smp.normal : nc.Psi.dagger() * smp.normal * nc.Psi;
        // dressing preserves the Hopf differential
        smp.hopf = spinor_field_and_hopf(xi, ev, fb.z, fb.logz).Q;
    };
#ifdef _OPENMP
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (int k = 0; k < n; ++k) work(k);
    } else {
        for (int k = 0; k < n; ++k) work(k);
    }
#else
    (void)parallel;
    for (int k = 0; k < n; ++k) work(k);
#endif
    return out;
}

JobResult run_job(const JobConfig& cfg) {
    JobResult res;
    try {
        GalleryData gd = build_gallery(cfg);
        EvaluationPair ev = cfg.evaluation ? *cfg.evaluation : gd.ev;

        std::vector<cplx> lambdas{ev.lambda0, ev.lambda1, gd.ev.lambda0, gd.ev.lambda1};
        std::vector<TransformStep> dress_steps;
        for (const auto& t : cfg.transforms) {
            switch (t.kind) {
                case TransformStep::Kind::AssociatedMove:
                    ev = associated_move(ev, t.t);
                    lambdas.push_back(ev.lambda1);
                    break;
                case TransformStep::Kind::DualSwap:
                    ev = ev.swapped();
                    break;
                case TransformStep::Kind::Dress:
                    dress_steps.push_back(t);
                    break;
            }
        }
        if (gd.dressing) lambdas.push_back(gd.dressing->alpha);

        LambdaSet set;
        for (cplx l : lambdas) {
            bool dup = false;
            for (cplx e : set.lambdas)
                if (std::abs(e - l) < 1e-14) dup = true;
            if (!dup) {
                set.lambdas.push_back(l);
                set.with_derivative.push_back(true);
            }
        }
        InitialData init = InitialData::constant(gd.init.z0, set, gd.init.C[0]);
        init.logz0 = gd.init.logz0;
        init.validate();

        std::vector<Patch> patches =
            cfg.grid ? std::vector<Patch>{{*cfg.grid, {}}} : default_patches(gd);
        res.summary.push_back("surface=" + gd.name);
        res.summary.push_back(std::string("target=") + (gd.target == Target::E3 ? "E3" : "H3"));

        cplx lref = (gd.target == Target::E3) ? ev.lambda0 : ev.lambda1;
        std::optional<SampledSurface> check_surf;  // uniform-step patch for checks
        int singular = 0;
        for (const Patch& patch : patches) {
            InitialData pinit = init;
            if (!patch.connector.empty()) {
                FrameBundle moved = integrate_frame(gd.xi, PathSpec::polyline(patch.connector),
                                                    init, cfg.solver);
                pinit.z0 = moved.z;
                pinit.logz0 = moved.logz;
                pinit.C = moved.phi;
                pinit.Cdot = moved.phidot;
            }
            GridFrames frames = propagate_grid(gd.xi, patch.grid, pinit, cfg.solver,
                                               cfg.parallel);
            for (const auto& step : dress_steps) {
                DressingFamily R =
                    DressingFamily::exponential(set, lref, step.dress_x, step.dress_u);
                for (auto& node : frames.nodes) node = holomorphic_dress(node, R);
            }
            SampledSurface surf =
                gd.dressing
                    ? evaluate_dressed_surface(gd.xi, frames, *gd.dressing, ev, gd.target,
                                               cfg.parallel)
                    : evaluate_surface(gd.xi, frames, ev, gd.target, cfg.parallel);
            estimate_mean_curvature(surf);
            for (const auto& s : surf.samples)
                if (!s.valid) ++singular;
            Mesh part = build_mesh(surf);
            int base = static_cast<int>(res.mesh.vertices.size());
            res.mesh.vertices.insert(res.mesh.vertices.end(), part.vertices.begin(),
                                     part.vertices.end());
            res.mesh.diagnostics.insert(res.mesh.diagnostics.end(), part.diagnostics.begin(),
                                        part.diagnostics.end());
            for (auto t : part.triangles)
                res.mesh.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
            if (!check_surf || (check_surf->grid.chart.kind != Chart::Kind::Identity &&
                                patch.grid.chart.kind == Chart::Kind::Identity))
                check_surf = std::move(surf);
        }
        res.summary.push_back("vertices=" + std::to_string(res.mesh.vertices.size()));
        res.summary.push_back("faces=" + std::to_string(res.mesh.triangles.size()));
        res.summary.push_back("singular_nodes=" + std::to_string(singular));
        if (gd.dressing) {
            std::string preds;
            for (cplx z : gd.predicted_singularities) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.6f%+.6fi", z.real(), z.imag());
                if (!preds.empty()) preds += ";";
                preds += buf;
            }
            res.summary.push_back("predicted_singularities=" + preds);
        }

        if (!cfg.obj_path.empty()) {
            write_obj(res.mesh, cfg.obj_path);
            res.summary.push_back("obj=" + cfg.obj_path);
        }
        if (!cfg.csv_path.empty()) {
            write_csv(res.mesh, cfg.csv_path);
            res.summary.push_back("csv=" + cfg.csv_path);
        }

        bool all_ok = true;
        auto want = [&](const std::string& name) {
            if (cfg.checks.empty()) return false;
            for (const auto& c : cfg.checks)
                if (c == name || c == "all") return true;
            return false;
        };
        if (want("conformality") || want("hopf")) {
            PdeResiduals pr = pde_residuals(*check_surf);
            if (want("conformality")) {
                bool ok = pr.conformality < 1e-6 && pr.h_deviation < 1e-3 &&
                          pr.metric_consistency < 1e-4 && pr.nullity < 1e-6;
                all_ok = all_ok && ok;
                res.summary.push_back("conformality_residual=" + fmt(pr.conformality));
                res.summary.push_back("metric_residual=" + fmt(pr.metric_consistency));
                res.summary.push_back("nullity_residual=" + fmt(pr.nullity));
                res.summary.push_back("h_deviation=" + fmt(pr.h_deviation));
                res.summary.push_back(std::string("check_conformality=") + (ok ? "pass" : "fail"));
            }
            if (want("hopf")) {
                bool ok = pr.hopf_consistency < 1e-4;
                all_ok = all_ok && ok;
                res.summary.push_back("hopf_residual=" + fmt(pr.hopf_consistency));
                res.summary.push_back(std::string("check_hopf=") + (ok ? "pass" : "fail"));
            }
        }
        if (want("closing")) {
            if (gd.loops.empty()) {
                res.summary.push_back("check_closing=pass");
                res.summary.push_back("closing_loops=0");
            } else {
                std::vector<MonodromySample> ms;
                for (size_t k = 0; k < gd.loops.size(); ++k) {
                    MonodromySample m = monodromy(gd.xi, gd.loops[k], init, cfg.solver);
                    m.loop_id = static_cast<int>(k);
                    if (gd.dressing) {
                        cplx lref = (gd.target == Target::E3) ? ev.lambda0 : ev.lambda1;
                        DressingFamily ghat = sf_ghat_family(*gd.dressing, set, lref);
                        m = dressed_monodromy(m, *gd.dressing, ghat);
                    }
                    ms.push_back(m);
                }
                ClosingVerdict v = check_closing(ms, ev);
                double m0max = 0, e3max = 0, h3max = 0;
                for (const auto& l : v.loops) {
                    m0max = std::max(m0max, l.m0_residual);
                    e3max = std::max(e3max, l.e3_residual);
                    h3max = std::max(h3max, l.h3_residual);
                }
                bool ok = (gd.target == Target::E3) ? v.closed_e3 : v.closed_h3;
                all_ok = all_ok && ok;
                res.summary.push_back("closing_m0_residual=" + fmt(m0max));
                res.summary.push_back("closing_e3_residual=" + fmt(e3max));
                res.summary.push_back("closing_h3_residual=" + fmt(h3max));
                res.summary.push_back(std::string("check_closing=") + (ok ? "pass" : "fail"));
            }
        }
        res.exit_code = all_ok ? 0 : 1;
    } catch (const ConfigError& e) {
        res.summary.push_back(std::string("error=") + e.what());
        res.exit_code = 2;
    } catch (const Error& e) {
        res.summary.push_back(std::string("error=") + e.what());
        res.exit_code = 2;
    }
    return res;
}

JobResult run_monodromy(const JobConfig& cfg, int loop_index) {
    JobResult res;
    try {
        GalleryData gd = build_gallery(cfg);
        if (loop_index < 0 || loop_index >= (int)gd.loops.size())
            throw ConfigError("/loop", "loop index out of range");
        EvaluationPair ev = cfg.evaluation ? *cfg.evaluation : gd.ev;
        LambdaSet set = make_set({ev.lambda0, ev.lambda1});
        InitialData init = InitialData::constant(gd.init.z0, set, gd.init.C[0]);
        MonodromySample m = monodromy(gd.xi, gd.loops[loop_index], init, cfg.solver);
        m.loop_id = loop_index;
        for (size_t i = 0; i < set.size(); ++i) {
            auto ev2 = eigenvalues(m.M[i]);
            char buf[200];
            std::snprintf(buf, sizeof buf,
                          "lambda=%.6g%+.6gi eig0=%.9g%+.9gi eig1=%.9g%+.9gi",
                          set.lambdas[i].real(), set.lambdas[i].imag(), ev2[0].real(),
                          ev2[0].imag(), ev2[1].real(), ev2[1].imag());
            res.summary.push_back(buf);
        }
        ClosingVerdict v = check_closing({m}, ev);
        res.summary.push_back("m0_residual=" + fmt(v.loops[0].m0_residual));
        res.summary.push_back("e3_residual=" + fmt(v.loops[0].e3_residual));
        res.summary.push_back("h3_residual=" + fmt(v.loops[0].h3_residual));
        res.exit_code = 0;
    } catch (const Error& e) {
        res.summary.push_back(std::string("error=") + e.what());
        res.exit_code = 2;
    }
    return res;
}

}  // namespace lwr
