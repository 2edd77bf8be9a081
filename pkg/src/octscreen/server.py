"""Read-only JSON API over one loaded checkpoint and one dataset directory.

Endpoints: GET /model/info, GET /volumes, POST /screen {volume_id, delta},
POST /sweep {volume_id, deltas}. The model and dataset never mutate after
startup, so identical requests produce byte-identical responses.
"""

from __future__ import annotations

import logging

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .dataset import SyntheticSample, group_volumes
from .model import ScreeningModel
from .screening import DEFAULT_SWEEP_DELTAS, screen_volume, select_center_frames
from .transition import SSTParams, extended_transition

log = logging.getLogger(__name__)

DELTA_MESSAGE = "delta must be in [-1,1]"


class ScreenRequest(BaseModel):
    volume_id: str
    delta: float


class SweepRequest(BaseModel):
    volume_id: str
    deltas: list[float]


def _odd(k: int) -> int:
    if k % 2 == 0:
        log.warning("frame count %d is even; using %d to keep the vote well-defined", k, k - 1)
        return k - 1
    return k


def _checked_delta(value: float) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise HTTPException(status_code=422, detail=DELTA_MESSAGE) from None
    if not np.isfinite(value) or not -1.0 <= value <= 1.0:
        raise HTTPException(status_code=422, detail=DELTA_MESSAGE)
    return value


def create_app(
    model: ScreeningModel,
    sst: SSTParams | None,
    samples: list[SyntheticSample],
    frames_per_screen: int = 7,
) -> FastAPI:
    app = FastAPI(title="octscreen", docs_url=None, redoc_url=None)
    volumes = group_volumes(samples)
    k = _odd(frames_per_screen)
    stacks: dict[str, np.ndarray] = {}
    meta: list[dict] = []
    for vid, frames in volumes.items():
        selected = select_center_frames(frames, min(k, len(frames) - (1 - len(frames) % 2)))
        stacks[vid] = np.stack([s.image for s in selected])
        meta.append({"volume_id": vid, "split": frames[0].split, "n_frames": len(frames)})

    def _stack(volume_id: str) -> np.ndarray:
        if volume_id not in stacks:
            raise HTTPException(status_code=404, detail=f"unknown volume '{volume_id}'")
        return stacks[volume_id]

    @app.get("/model/info")
    def model_info():
        ext = None
        if sst is not None:
            t = extended_transition(sst)
            ext = {"t11": t.t11, "t22": t.t22}
        g = model.config.effective_geometry
        return {
            "config": model.config.to_dict(),
            "effective_geometry": {
                "image_h": g.image_h,
                "image_w": g.image_w,
                "patch_h": g.patch_h,
                "patch_w": g.patch_w,
                "stride_h": g.stride_h,
                "stride_w": g.stride_w,
                "token_count": g.token_count,
            },
            "extended_transition": ext,
            "frames_per_screen": k,
            "n_volumes": len(meta),
            "sweep_deltas": list(DEFAULT_SWEEP_DELTAS),
        }

    @app.get("/volumes")
    def list_volumes():
        return {"volumes": meta}

    @app.post("/screen")
    def screen(req: ScreenRequest):
        delta = _checked_delta(req.delta)
        frames = _stack(req.volume_id)
        report = screen_volume(frames, delta, model, volume_id=req.volume_id)
        return report.to_dict()

    @app.post("/sweep")
    def sweep(req: SweepRequest):
        frames = _stack(req.volume_id)
        out = []
        for d in req.deltas:
            d = _checked_delta(d)
            out.append([d, float(np.mean(model.positive_probs(frames, d)))])
        return {"volume_id": req.volume_id, "sweep": out}

    return app
