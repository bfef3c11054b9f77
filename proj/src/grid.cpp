#include "sigmabilap/grid.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <queue>
#include <sstream>

#include "sigmabilap/errors.hpp"

namespace sigmabilap {

namespace {

constexpr double pi = std::numbers::pi;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (trim(v.substr(pos)).empty() && std::isfinite(x)) return x;
    } catch (const std::exception&) {
    }
    throw PreconditionViolation("invalid number for '" + key + "': " + v);
}

int parse_int(const std::string& key, const std::string& v) {
    const double x = parse_double(key, v);
    if (x != std::floor(x) || std::abs(x) > 1e7)
        throw PreconditionViolation("invalid integer for '" + key + "': " + v);
    return static_cast<int>(x);
}

}  // namespace

PolarCoord corner_polar(const CornerFrame& c, Point p) {
    const double dx = p.x - c.vertex.x, dy = p.y - c.vertex.y;
    const double u = dx * c.ref_dir.x + dy * c.ref_dir.y;
    const double w = c.orientation * (c.ref_dir.x * dy - c.ref_dir.y * dx);
    double t = std::atan2(w, u);
    if (t < 0.0) t += 2.0 * pi;
    return {std::hypot(dx, dy), t};
}

Grid2D::Grid2D(double x0, double y0, double h, int nx, int ny, std::vector<std::uint8_t> mask)
    : x0_(x0), y0_(y0), h_(h), nx_(nx), ny_(ny), cell_inside_(std::move(mask)) {
    if (!(h > 0.0) || nx < 2 || ny < 2)
        throw PreconditionViolation("grid needs h > 0 and at least 2 cells per direction");
    if (cell_inside_.size() != static_cast<std::size_t>(nx) * ny)
        throw PreconditionViolation("cell mask size does not match the grid");
    kind_.assign(num_nodes(), NodeKind::Outside);
    unknown_.assign(num_nodes(), -1);
    for (int j = 0; j <= ny_; ++j)
        for (int i = 0; i <= nx_; ++i) {
            int count = 0;
            for (int cj = j - 1; cj <= j; ++cj)
                for (int ci = i - 1; ci <= i; ++ci) count += cell_inside(ci, cj);
            const int k = node_index(i, j);
            if (count == 4) {
                kind_[k] = NodeKind::Interior;
                unknown_[k] = static_cast<int>(interior_.size());
                interior_.push_back(k);
            } else if (count > 0) {
                kind_[k] = NodeKind::Boundary;
            }
        }
    if (interior_.empty()) throw PreconditionViolation("grid has no interior nodes");
    if (!interior_connected()) throw PreconditionViolation("interior nodes are not connected");
}

bool Grid2D::cell_inside(int ci, int cj) const {
    if (ci < 0 || cj < 0 || ci >= nx_ || cj >= ny_) return false;
    return cell_inside_[ci + nx_ * cj] != 0;
}

Point Grid2D::node(int k) const {
    const int i = k % (nx_ + 1), j = k / (nx_ + 1);
    return {x0_ + h_ * i, y0_ + h_ * j};
}

bool Grid2D::interior_connected() const {
    std::vector<char> seen(num_nodes(), 0);
    std::queue<int> q;
    q.push(interior_.front());
    seen[interior_.front()] = 1;
    std::size_t reached = 0;
    while (!q.empty()) {
        const int k = q.front();
        q.pop();
        ++reached;
        const int i = k % (nx_ + 1), j = k / (nx_ + 1);
        const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
        for (const auto& n : nb) {
            if (n[0] < 0 || n[1] < 0 || n[0] > nx_ || n[1] > ny_) continue;
            const int m = node_index(n[0], n[1]);
            if (!seen[m] && kind_[m] == NodeKind::Interior) {
                seen[m] = 1;
                q.push(m);
            }
        }
    }
    return reached == interior_.size();
}

NodeField Grid2D::interpolate(const std::function<double(double, double)>& f) const {
    NodeField u = zeros();
    for (int k : interior_) {
        const Point p = node(k);
        u(k) = f(p.x, p.y);
    }
    return u;
}

void Grid2D::add_corner(const CornerFrame& c) {
    if (std::abs(c.alpha - 1.5 * pi) > 1e-12)
        throw FrameError("grid-aligned reentrant corners have aperture 3pi/2");
    if (c.orientation != 1 && c.orientation != -1)
        throw FrameError("corner orientation must be +1 or -1");
    const double rx = c.ref_dir.x, ry = c.ref_dir.y;
    const bool axis = (std::abs(std::abs(rx) - 1.0) < 1e-12 && std::abs(ry) < 1e-12) ||
                      (std::abs(std::abs(ry) - 1.0) < 1e-12 && std::abs(rx) < 1e-12);
    if (!axis) throw FrameError("corner reference direction must be an axis unit vector");
    const double fi = (c.vertex.x - x0_) / h_, fj = (c.vertex.y - y0_) / h_;
    const int i = static_cast<int>(std::lround(fi)), j = static_cast<int>(std::lround(fj));
    if (std::abs(fi - i) > 1e-9 || std::abs(fj - j) > 1e-9 || i < 0 || j < 0 || i > nx_ ||
        j > ny_)
        throw FrameError("corner vertex is not a grid node");
    int count = 0;
    for (int cj = j - 1; cj <= j; ++cj)
        for (int ci = i - 1; ci <= i; ++ci) count += cell_inside(ci, cj);
    if (count != 3) throw FrameError("corner vertex is not a reentrant boundary vertex");

    // second edge: ref rotated by orientation * 3pi/2
    const Point d1 = c.orientation == 1 ? Point{ry, -rx} : Point{-ry, rx};
    const double mx = c.vertex.x + 0.5 * h_ * (rx + d1.x);
    const double my = c.vertex.y + 0.5 * h_ * (ry + d1.y);
    const int mci = static_cast<int>(std::floor((mx - x0_) / h_));
    const int mcj = static_cast<int>(std::floor((my - y0_) / h_));
    if (cell_inside(mci, mcj))
        throw FrameError("corner frame does not map the adjacent edges to theta = 0 and alpha");

    CornerFrame frame = c;
    frame.vertex = {x0_ + h_ * i, y0_ + h_ * j};
    for (int k : interior_) {
        const PolarCoord pc = corner_polar(frame, node(k));
        if (!(pc.theta > 0.0 && pc.theta < frame.alpha))
            throw FrameError("corner frame does not cover the domain");
    }
    corners_.push_back(frame);
}

Grid2D Grid2D::rectangle(int nx, int ny, double x0, double x1, double y0, double y1) {
    if (nx < 2 || ny < 2 || !(x1 > x0) || !(y1 > y0))
        throw PreconditionViolation("invalid rectangle");
    const double h = (x1 - x0) / nx;
    if (std::abs((y1 - y0) / ny - h) > 1e-12 * h)
        throw PreconditionViolation("rectangle cells must be square");
    return Grid2D(x0, y0, h, nx, ny, std::vector<std::uint8_t>(std::size_t(nx) * ny, 1));
}

Grid2D Grid2D::lshape(int n) {
    if (n < 4 || n % 2 != 0) throw PreconditionViolation("lshape needs an even n >= 4");
    const double h = 2.0 / n;
    std::vector<std::uint8_t> in(std::size_t(n) * n, 1);
    for (int cj = 0; cj < n; ++cj)
        for (int ci = 0; ci < n; ++ci) {
            const double x = -1.0 + h * (ci + 0.5), y = -1.0 + h * (cj + 0.5);
            if (x > 0.0 && y < 0.0) in[ci + n * cj] = 0;
        }
    Grid2D g(-1.0, -1.0, h, n, n, std::move(in));
    g.add_corner({{0.0, 0.0}, 1.5 * pi, {1.0, 0.0}, 1});
    return g;
}

Grid2D Grid2D::notched(int n, double w) {
    if (n < 8 || n % 2 != 0) throw PreconditionViolation("notched needs an even n >= 8");
    const double h = 2.0 / n;
    const double steps = w / h;
    if (!(w > 0.0 && w < 1.0) || std::abs(steps - std::round(steps)) > 1e-9 || std::round(steps) < 1)
        throw PreconditionViolation("notched half-width must be a positive multiple of h below 1");
    std::vector<std::uint8_t> in(std::size_t(n) * n, 1);
    for (int cj = 0; cj < n; ++cj)
        for (int ci = 0; ci < n; ++ci) {
            const double x = -1.0 + h * (ci + 0.5), y = -1.0 + h * (cj + 0.5);
            if (x > 0.0 && std::abs(y) > w) in[ci + n * cj] = 0;
        }
    Grid2D g(-1.0, -1.0, h, n, n, std::move(in));
    g.add_corner({{0.0, w}, 1.5 * pi, {0.0, 1.0}, 1});
    g.add_corner({{0.0, -w}, 1.5 * pi, {0.0, -1.0}, -1});
    return g;
}

std::multimap<std::string, std::string> parse_key_values(std::istream& in) {
    std::multimap<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw PreconditionViolation("line " + std::to_string(lineno) + ": expected key=value");
        kv.emplace(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return kv;
}

Grid2D build_domain(const std::multimap<std::string, std::string>& kv) {
    auto get = [&](const std::string& k) -> const std::string* {
        const auto it = kv.find(k);
        return it == kv.end() ? nullptr : &it->second;
    };
    const std::string* dom = get("domain");
    if (!dom) throw PreconditionViolation("domain description needs 'domain='");
    int nx = 0, ny = 0;
    if (const auto* v = get("n")) nx = ny = parse_int("n", *v);
    if (const auto* v = get("nx")) nx = parse_int("nx", *v);
    if (const auto* v = get("ny")) ny = parse_int("ny", *v);
    if (nx == 0) nx = ny;
    if (ny == 0) ny = nx;
    if (nx == 0) throw PreconditionViolation("domain description needs nx");
    auto num = [&](const std::string& k, double def) {
        const auto* v = get(k);
        return v ? parse_double(k, *v) : def;
    };

    Grid2D g = [&] {
        if (*dom == "rectangle")
            return Grid2D::rectangle(nx, ny, num("x0", 0.0), num("x1", 1.0), num("y0", 0.0),
                                     num("y1", num("y0", 0.0) + ny * (num("x1", 1.0) - num("x0", 0.0)) / nx));
        if (nx != ny) throw PreconditionViolation(*dom + " needs nx == ny");
        if (*dom == "lshape") return Grid2D::lshape(nx);
        if (*dom == "notched") return Grid2D::notched(nx, num("w", 0.25));
        throw PreconditionViolation("unknown domain '" + *dom + "'");
    }();

    const auto [b, e] = kv.equal_range("corner");
    if (b != e) {
        g.clear_corners();
        for (auto it = b; it != e; ++it) {
            std::string s = it->second;
            for (char& ch : s)
                if (ch == ',') ch = ' ';
            std::istringstream is(s);
            double x, y, dx, dy;
            int o;
            if (!(is >> x >> y >> dx >> dy >> o))
                throw PreconditionViolation("corner needs x,y,dx,dy,orientation: " + it->second);
            g.add_corner({{x, y}, 1.5 * pi, {dx, dy}, o});
        }
    }
    return g;
}

SigmaField SigmaField::constant(const Grid2D& g, double value) {
    return SigmaField(std::vector<double>(std::size_t(g.nx()) * g.ny(), value));
}

SigmaField SigmaField::from_function(const Grid2D& g,
                                     const std::function<double(double, double)>& f) {
    std::vector<double> c(std::size_t(g.nx()) * g.ny());
    for (int cj = 0; cj < g.ny(); ++cj)
        for (int ci = 0; ci < g.nx(); ++ci)
            c[ci + g.nx() * cj] = f(g.x0() + g.h() * (ci + 0.5), g.y0() + g.h() * (cj + 0.5));
    return SigmaField(std::move(c));
}

void SigmaField::validate(const Grid2D& g, double sigma_min) const {
    if (cells_.size() != std::size_t(g.nx()) * g.ny())
        throw PreconditionViolation("sigma field size does not match the grid");
    for (int cj = 0; cj < g.ny(); ++cj)
        for (int ci = 0; ci < g.nx(); ++ci) {
            if (!g.cell_inside(ci, cj)) continue;
            const double s = cells_[ci + g.nx() * cj];
            if (!std::isfinite(s) || std::abs(s) < sigma_min)
                throw PreconditionViolation("|sigma| must stay above sigma_min");
        }
}

NodeField SigmaField::inverse_at_nodes(const Grid2D& g) const {
    validate(g);
    NodeField out = g.zeros();
    const int nx = g.nx();
    for (int k : g.interior_nodes()) {
        const int i = k % (nx + 1), j = k / (nx + 1);
        out(k) = 0.25 * (1.0 / cells_[(i - 1) + nx * (j - 1)] + 1.0 / cells_[i + nx * (j - 1)] +
                         1.0 / cells_[(i - 1) + nx * j] + 1.0 / cells_[i + nx * j]);
    }
    return out;
}

SigmaField read_sigma_file(std::istream& in, const Grid2D& g) {
    std::vector<double> vals;
    std::string tok;
    std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    for (char& ch : all)
        if (ch == ',') ch = ' ';
    std::istringstream is(all);
    while (is >> tok) vals.push_back(parse_double("sigma", tok));
    if (vals.size() != std::size_t(g.nx()) * g.ny())
        throw PreconditionViolation("sigma file must hold nx * ny values");
    SigmaField s(std::move(vals));
    s.validate(g);
    return s;
}

}  // namespace sigmabilap
