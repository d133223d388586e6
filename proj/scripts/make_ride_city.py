#!/usr/bin/env python3
"""Regenerates data/topologies/ride-city.json.

The mesh mirrors a ride-hailing + food-delivery backend: three tier-0
gateways fanning out through core services (tier 1) into product services
(tier 2-3) and cosmetic leaves (tier 4-5). Conventions the tests rely on:

  - every edge to a tier>=2 callee is declared non_critical with a fallback
    marker; critical edges only point at tier 0/1 services
  - organic failure weight lives only on cosmetic tier 4/5 endpoints plus
    /ratings/summary, never on a critical path
  - every timeout budget exceeds the callee's worst-case (max-jitter)
    subtree latency, so a fault-free run never times out anywhere
  - the deep latency chain match -> vehicle -> recs -> analytics has wide
    budgets so injected latency at tier 5 propagates to the trip total,
    while tighter budgets upstream clip tier>=2 injections
"""

import json
import os

SERVICES = [
    # name, tier, base_ms, jitter_ms
    ("ride_gateway", 0, 8, 0),
    ("driver_gateway", 0, 7, 0),
    ("eats_gateway", 0, 8, 0),
    ("auth", 0, 5, 0),
    ("trip", 1, 10, 1),
    ("match", 1, 14, 1),
    ("payments", 1, 9, 1),
    ("order", 1, 11, 1),
    ("dispatch", 1, 12, 1),
    ("comms", 1, 7, 1),
    ("pricing", 2, 12, 2),
    ("maps", 2, 15, 2),
    ("geo", 2, 9, 2),
    ("fare", 2, 6, 2),
    ("restaurant", 2, 10, 2),
    ("menu", 2, 12, 2),
    ("courier", 2, 11, 2),
    ("vehicle", 2, 8, 2),
    ("wallet", 2, 8, 2),
    ("surge", 2, 7, 2),
    ("eta", 3, 10, 2),
    ("receipts", 3, 7, 2),
    ("ratings", 3, 8, 2),
    ("notify", 3, 6, 2),
    ("search", 3, 9, 2),
    ("catalog", 3, 8, 2),
    ("promo", 4, 6, 2),
    ("loyalty", 4, 7, 2),
    ("recs", 4, 7, 2),
    ("profile_pic", 4, 6, 2),
    ("translate", 4, 6, 2),
    ("weather", 4, 5, 2),
    ("ads", 5, 5, 2),
    ("survey", 5, 5, 2),
    ("banner", 5, 4, 2),
    ("analytics", 5, 4, 2),
    ("feedback", 5, 5, 2),
    ("news", 5, 6, 2),
    ("social", 5, 5, 2),
    ("tips", 5, 5, 2),
]

# service -> [(path, {flow: category}, organic_weight)]
ENDPOINTS = {
    "ride_gateway": [
        ("/ride/home", {}, 0.0),
        ("/ride/destination", {}, 0.0),
        ("/ride/products", {}, 0.0),
        ("/trip/progress", {}, 0.0),
        ("/trip/rating", {}, 0.0),
    ],
    "driver_gateway": [("/driver/offer", {}, 0.0)],
    "eats_gateway": [
        ("/eats/home", {}, 0.0),
        ("/eats/menu", {}, 0.0),
        ("/eats/cart", {}, 0.0),
        ("/eats/tracking", {}, 0.0),
    ],
    "auth": [("/auth/session", {"core-trip": "supporting", "eats-order": "supporting"}, 0.0)],
    "trip": [("/trip/context", {"core-trip": "direct"}, 0.0)],
    "match": [("/match/driver", {"core-trip": "direct"}, 0.0)],
    "payments": [("/payments/authorize",
                  {"core-trip": "supporting", "eats-order": "supporting"}, 0.0)],
    "order": [("/order/context", {"eats-order": "direct"}, 0.0)],
    "dispatch": [("/dispatch/assign", {"core-trip": "direct"}, 0.0)],
    "comms": [("/comms/channel", {"core-trip": "supporting"}, 0.0)],
    "pricing": [("/pricing/quote", {"core-trip": "direct"}, 0.0)],
    "maps": [("/maps/route", {"core-trip": "indirect"}, 0.0)],
    "geo": [("/geo/resolve", {"core-trip": "indirect", "eats-order": "indirect"}, 0.0)],
    "fare": [("/fare/finalize", {"core-trip": "supporting"}, 0.0)],
    "restaurant": [("/restaurant/profile", {"eats-order": "direct"}, 0.0)],
    "menu": [("/menu/items", {"eats-order": "direct"}, 0.0)],
    "courier": [("/courier/assign", {"eats-order": "direct"}, 0.0)],
    "vehicle": [("/vehicle/options", {"core-trip": "indirect"}, 0.0)],
    "wallet": [("/wallet/balance",
                {"core-trip": "supporting", "eats-order": "supporting"}, 0.0)],
    "surge": [("/surge/level", {"core-trip": "indirect"}, 0.0)],
    "eta": [("/eta/estimate", {"core-trip": "indirect", "eats-order": "indirect"}, 0.0)],
    "receipts": [("/receipts/prepare", {"core-trip": "supporting"}, 0.0)],
    "ratings": [("/ratings/summary", {"core-trip": "indirect"}, 0.05)],
    "notify": [("/notify/push", {"core-trip": "supporting", "eats-order": "supporting"}, 0.0)],
    "search": [("/search/restaurants", {"eats-order": "indirect"}, 0.0)],
    "catalog": [("/catalog/browse", {"eats-order": "indirect"}, 0.0)],
    "promo": [("/promo/banner", {"core-trip": "unrelated", "eats-order": "unrelated"}, 0.1)],
    "loyalty": [("/loyalty/status", {"core-trip": "unrelated", "eats-order": "unrelated"}, 0.08)],
    "recs": [("/recs/feed", {"core-trip": "unrelated", "eats-order": "unrelated"}, 0.0)],
    "profile_pic": [("/profile/avatar", {"core-trip": "supporting", "eats-order": "supporting"}, 0.0)],
    "translate": [("/i18n/strings", {"core-trip": "supporting", "eats-order": "supporting"}, 0.0)],
    "weather": [("/weather/now", {"core-trip": "unrelated"}, 0.0)],
    "ads": [("/ads/slot", {"core-trip": "unrelated", "eats-order": "unrelated"}, 0.15)],
    "survey": [("/survey/prompt", {"core-trip": "unrelated", "eats-order": "unrelated"}, 0.12)],
    "banner": [("/banner/content", {"core-trip": "unrelated", "eats-order": "unrelated"}, 0.1)],
    "analytics": [("/analytics/ingest", {"core-trip": "unrelated", "eats-order": "unrelated"}, 0.0)],
    "feedback": [("/feedback/form", {"core-trip": "unrelated"}, 0.0)],
    "news": [("/news/feed", {"core-trip": "unrelated", "eats-order": "unrelated"}, 0.07)],
    "social": [("/social/share", {"core-trip": "unrelated"}, 0.0)],
    "tips": [("/tips/options", {"core-trip": "indirect"}, 0.0)],
}

NC = "non_critical"
C = "critical"

# caller -> stage -> [(callee, endpoint, criticality, budget, fallback)]
EDGES = [
    ("ride_gateway", 0, "auth", "/auth/session", C, 60, None),
    ("ride_gateway", 1, "trip", "/trip/context", C, 8000, None),
    ("ride_gateway", 1, "promo", "/promo/banner", NC, 40, "discount_banner:missing"),
    ("ride_gateway", 1, "ads", "/ads/slot", NC, 30, "ad_slot:missing"),
    ("ride_gateway", 1, "banner", "/banner/content", NC, 30, "hero_banner:missing"),
    ("ride_gateway", 1, "loyalty", "/loyalty/status", NC, 50, "loyalty_chip:missing"),
    ("ride_gateway", 2, "notify", "/notify/push", NC, 40, "notification_toast:missing"),
    ("ride_gateway", 2, "profile_pic", "/profile/avatar", NC, 40, "avatar:missing"),

    ("driver_gateway", 0, "auth", "/auth/session", C, 60, None),
    ("driver_gateway", 1, "match", "/match/driver", C, 4500, None),
    ("driver_gateway", 1, "comms", "/comms/channel", NC, 80, "driver_chat:missing"),
    ("driver_gateway", 1, "weather", "/weather/now", NC, 40, "weather_chip:missing"),
    ("driver_gateway", 1, "social", "/social/share", NC, 40, "share_button:missing"),

    ("eats_gateway", 0, "auth", "/auth/session", C, 60, None),
    ("eats_gateway", 1, "order", "/order/context", C, 8000, None),
    ("eats_gateway", 1, "banner", "/banner/content", NC, 30, "hero_banner:missing"),
    ("eats_gateway", 1, "survey", "/survey/prompt", NC, 30, "survey_card:missing"),
    ("eats_gateway", 1, "news", "/news/feed", NC, 50, "news_card:missing"),
    ("eats_gateway", 2, "notify", "/notify/push", NC, 40, "notification_toast:missing"),
    ("eats_gateway", 2, "translate", "/i18n/strings", NC, 40, "i18n_pack:missing"),

    ("trip", 0, "pricing", "/pricing/quote", NC, 4000, "fare_estimate:placeholder"),
    ("trip", 0, "maps", "/maps/route", NC, 200, "route_preview:placeholder"),
    ("trip", 0, "fare", "/fare/finalize", NC, 900, "request_ride_button:delayed:1200"),
    ("trip", 1, "match", "/match/driver", C, 4500, None),
    ("trip", 2, "payments", "/payments/authorize", C, 400, None),
    ("trip", 2, "surge", "/surge/level", NC, 60, "surge_badge:missing"),
    ("trip", 3, "notify", "/notify/push", NC, 40, "notification_toast:missing"),

    ("match", 0, "dispatch", "/dispatch/assign", C, 200, None),
    ("match", 0, "vehicle", "/vehicle/options", NC, 2600, "vehicle_suggestion:missing"),
    ("match", 0, "eta", "/eta/estimate", NC, 60, "pickup_eta:delayed:800"),

    ("payments", 0, "wallet", "/wallet/balance", NC, 60, "payment_chip:missing"),
    ("payments", 1, "receipts", "/receipts/prepare", NC, 60, "receipt_line:missing"),

    ("order", 0, "restaurant", "/restaurant/profile", NC, 120, "restaurant_header:missing"),
    ("order", 0, "search", "/search/restaurants", NC, 80, "search_bar:missing"),
    ("order", 1, "menu", "/menu/items", NC, 150, "add_item_button:placeholder"),
    ("order", 2, "payments", "/payments/authorize", C, 400, None),
    ("order", 2, "catalog", "/catalog/browse", NC, 80, "menu_photos:missing"),
    ("order", 3, "courier", "/courier/assign", NC, 200, "courier_map:missing"),

    ("pricing", 0, "geo", "/geo/resolve", NC, 80, "map_pin:missing"),
    ("pricing", 0, "surge", "/surge/level", NC, 60, "surge_badge:missing"),
    ("pricing", 1, "promo", "/promo/banner", NC, 40, "discount_banner:missing"),

    ("maps", 0, "geo", "/geo/resolve", NC, 80, "map_pin:missing"),

    ("restaurant", 0, "ratings", "/ratings/summary", NC, 80, "rating_badge:missing"),
    ("menu", 0, "catalog", "/catalog/browse", NC, 80, "menu_photos:missing"),
    ("courier", 0, "eta", "/eta/estimate", NC, 60, "courier_eta:missing"),

    ("vehicle", 0, "recs", "/recs/feed", NC, 2400, "vehicle_suggestion:missing"),
    ("recs", 0, "analytics", "/analytics/ingest", NC, 2300, "telemetry_chip:missing"),
    ("ads", 0, "analytics", "/analytics/ingest", NC, 2300, "telemetry_chip:missing"),
    ("ratings", 0, "tips", "/tips/options", NC, 40, "tip_chips:missing"),
    ("ratings", 0, "feedback", "/feedback/form", NC, 40, "feedback_chip:missing"),
]

ENTRY_POINTS = {
    "core-trip": {"service": "ride_gateway", "endpoint": "/ride/home"},
    "eats-order": {"service": "eats_gateway", "endpoint": "/eats/home"},
}


def worst_case(name, bases, jitters, plan, memo):
    """Max possible fault-free subtree latency of one call into `name`."""
    if name in memo:
        return memo[name]
    total = bases[name] + jitters[name]
    for stage in plan.get(name, {}).values():
        total += max(min(budget, worst_case(callee, bases, jitters, plan, memo))
                     for (callee, budget) in stage)
    memo[name] = total
    return total


def main():
    bases = {n: b for (n, _, b, _) in SERVICES}
    jitters = {n: j for (n, _, _, j) in SERVICES}
    tiers = {n: t for (n, t, _, _) in SERVICES}

    plan = {}
    for (caller, stage, callee, endpoint, crit, budget, fb) in EDGES:
        plan.setdefault(caller, {}).setdefault(stage, []).append((callee, budget))

    memo = {}
    for (caller, stage, callee, endpoint, crit, budget, fb) in EDGES:
        wc = worst_case(callee, bases, jitters, plan, memo)
        assert budget > wc, f"edge {caller}->{callee} budget {budget} <= worst case {wc}"
        if crit == C:
            assert tiers[callee] <= 1, f"critical edge into tier>=2: {caller}->{callee}"
        else:
            assert fb, f"non_critical edge without fallback: {caller}->{callee}"

    used = {callee for (_, _, callee, _, _, _, _) in EDGES}
    roots = {"ride_gateway", "driver_gateway", "eats_gateway"}
    orphans = {n for (n, _, _, _) in SERVICES} - used - roots
    assert not orphans, f"unreachable services: {orphans}"

    services = []
    for (name, tier, base, jitter) in SERVICES:
        svc = {"name": name, "tier": tier, "base_latency_ms": base}
        if jitter:
            svc["jitter_ms"] = jitter
        eps = []
        for (path, tags, weight) in ENDPOINTS[name]:
            ep = {"path": path}
            if tags:
                ep["relevance_tags"] = tags
            if weight:
                ep["baseline_failure_weight"] = weight
            eps.append(ep)
        svc["endpoints"] = eps
        services.append(svc)

    edges = []
    for (caller, stage, callee, endpoint, crit, budget, fb) in EDGES:
        e = {"caller": caller, "stage": stage, "callee": callee, "endpoint": endpoint,
             "declared_criticality": crit, "timeout_budget_ms": budget}
        if fb:
            e["fallback_payload"] = fb
        edges.append(e)

    doc = {"name": "ride-city", "services": services, "edges": edges,
           "entry_points": ENTRY_POINTS}

    out = os.path.join(os.path.dirname(__file__), "..", "data", "topologies",
                       "ride-city.json")
    with open(out, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")
    print(f"wrote {os.path.normpath(out)}: {len(services)} services, {len(edges)} edges")


if __name__ == "__main__":
    main()
