#include "scenetext/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <mutex>
#include <shared_mutex>

#include "scenetext/errors.hpp"
#include "scenetext/render.hpp"

namespace scenetext {

using nlohmann::json;

namespace {

double parse_real(const std::string& key, const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ValidationError("parameter " + key + " must be a finite number");
  return v;
}

template <typename Int>
Int parse_integer(const std::string& key, const std::string& s) {
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ValidationError("parameter " + key + " must be an integer");
  return v;
}

}  // namespace

PreviewQuery parse_preview_query(const std::multimap<std::string, std::string>& params) {
  PreviewQuery q;
  const auto get = [&](const std::string& key) -> const std::string* {
    const auto it = params.find(key);
    return it == params.end() ? nullptr : &it->second;
  };
  if (auto s = get("x")) q.pose.position.x() = parse_real("x", *s);
  if (auto s = get("y")) q.pose.position.y() = parse_real("y", *s);
  if (auto s = get("z")) q.pose.position.z() = parse_real("z", *s);
  if (auto s = get("yaw")) q.pose.yaw = parse_real("yaw", *s);
  if (auto s = get("pitch")) q.pose.pitch = parse_real("pitch", *s);
  if (auto s = get("roll")) q.pose.roll = parse_real("roll", *s);
  if (auto s = get("w")) q.width = parse_integer<int>("w", *s);
  if (auto s = get("h")) q.height = parse_integer<int>("h", *s);
  if (auto s = get("seed")) q.seed = parse_integer<std::uint64_t>("seed", *s);
  if (auto s = get("preset")) q.preset = *s;
  if (q.width < 1 || q.height < 1 || q.width > kMaxPreviewSide || q.height > kMaxPreviewSide)
    throw ValidationError("preview size must be within 1.." + std::to_string(kMaxPreviewSide));
  (void)IlluminationPreset::named(q.preset);
  return q;
}

CameraIntrinsics preview_intrinsics(int width, int height) {
  CameraIntrinsics k = CameraIntrinsics::with_defaults(width, height);
  k.fx = k.fy = 1000.0 * width / 720.0;
  return k;
}

std::vector<TextRegion2D> preview_regions(const Scene& scene, const PreviewQuery& query,
                                          const ProposalConfig& proposal) {
  const GBuffer g = render_gbuffer(scene, query.pose.pose(), preview_intrinsics(query.width, query.height),
                                   IlluminationPreset::named("normal"));
  const NormalBoundaryMap map = compute_boundary_map(g.normal_8, g.hit_mask, proposal.threshold);
  Rng rng = make_rng(query.seed);
  return propose_regions(map, proposal, rng);
}

struct PreviewService::Impl {
  const Scene scene;
  const std::filesystem::path anchors_path;
  mutable std::shared_mutex mutex;
  std::vector<CameraAnchor> anchors;
  httplib::Server server;

  Impl(Scene s, std::filesystem::path p) : scene(std::move(s)), anchors_path(std::move(p)), anchors(scene.anchors) {
    routes();
  }

  static void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, {{"error", message}}, status);
  }

  std::string next_id() const {
    for (int n = 1;; ++n) {
      const std::string id = "anchor-" + std::to_string(n);
      if (std::none_of(anchors.begin(), anchors.end(), [&](const CameraAnchor& a) { return a.id == id; })) return id;
    }
  }

  json info() const {
    Eigen::AlignedBox3d bounds;
    for (const auto& m : scene.meshes)
      for (const auto& v : m.mesh.vertices) bounds.extend(v);
    std::shared_lock lock(mutex);
    return {{"id", scene.id},
            {"meshes", scene.meshes.size()},
            {"triangles", scene.triangle_count()},
            {"z_max", scene.z_max},
            {"anchors", anchors.size()},
            {"bounds",
             {{"min", {bounds.min().x(), bounds.min().y(), bounds.min().z()}},
              {"max", {bounds.max().x(), bounds.max().y(), bounds.max().z()}}}},
            {"presets", {"normal", "bright", "dark", "fog"}},
            {"max_preview_side", kMaxPreviewSide}};
  }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const ValidationError& e) {
        send_error(res, 400, e.what());
      } catch (const DomainError& e) {
        send_error(res, 400, e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, e.what());
      }
    });
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Get("/scene/info", [this](const httplib::Request&, httplib::Response& res) { send_json(res, info()); });

    server.Get("/preview", [this](const httplib::Request& req, httplib::Response& res) {
      const PreviewQuery q = parse_preview_query(req.params);
      const RenderWorld world(scene);
      const RgbImage image = render_image(world, q.pose.pose(), preview_intrinsics(q.width, q.height),
                                          IlluminationPreset::named(q.preset));
      const auto png = encode_png(image);
      res.set_content(std::string(png.begin(), png.end()), "image/png");
    });

    server.Get("/regions", [this](const httplib::Request& req, httplib::Response& res) {
      const PreviewQuery q = parse_preview_query(req.params);
      send_json(res, to_json(preview_regions(scene, q)));
    });

    server.Get("/anchors", [this](const httplib::Request&, httplib::Response& res) {
      std::shared_lock lock(mutex);
      json list = json::array();
      for (const auto& a : anchors) list.push_back(anchor_to_json(a));
      send_json(res, list);
    });

    server.Post("/anchors", [this](const httplib::Request& req, httplib::Response& res) {
      json body;
      try {
        body = json::parse(req.body);
      } catch (const json::exception& e) {
        return send_error(res, 400, std::string("malformed JSON: ") + e.what());
      }
      CameraAnchor anchor;
      try {
        anchor = anchor_from_json(body);
      } catch (const json::exception& e) {
        return send_error(res, 400, std::string("invalid anchor: ") + e.what());
      }
      std::unique_lock lock(mutex);
      if (anchor.id.empty()) anchor.id = next_id();
      if (std::any_of(anchors.begin(), anchors.end(), [&](const CameraAnchor& a) { return a.id == anchor.id; }))
        return send_error(res, 409, "duplicate anchor id: " + anchor.id);
      std::vector<CameraAnchor> updated = anchors;
      updated.push_back(anchor);
      write_anchors_file(anchors_path, updated);
      anchors = std::move(updated);
      send_json(res, anchor_to_json(anchor), 201);
    });

    server.Delete(R"(/anchors/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      std::unique_lock lock(mutex);
      const auto it = std::find_if(anchors.begin(), anchors.end(), [&](const CameraAnchor& a) { return a.id == id; });
      if (it == anchors.end()) return send_error(res, 404, "unknown anchor id: " + id);
      std::vector<CameraAnchor> updated = anchors;
      updated.erase(updated.begin() + (it - anchors.begin()));
      write_anchors_file(anchors_path, updated);
      anchors = std::move(updated);
      send_json(res, {{"deleted", id}});
    });
  }
};

PreviewService::PreviewService(Scene scene, std::filesystem::path anchors_path)
    : impl_(std::make_unique<Impl>(std::move(scene), std::move(anchors_path))) {}

PreviewService::~PreviewService() { stop(); }

int PreviewService::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound <= 0) throw IoError("cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void PreviewService::listen() { impl_->server.listen_after_bind(); }
void PreviewService::stop() {
  if (impl_) impl_->server.stop();
}
void PreviewService::wait_until_ready() const { impl_->server.wait_until_ready(); }

std::vector<CameraAnchor> PreviewService::anchors() const {
  std::shared_lock lock(impl_->mutex);
  return impl_->anchors;
}

}  // namespace scenetext
