"""
Adam с проекцией ширин щелей на физический диапазон.
"""

from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import torch

from app.photonics.lut import WIDTH_MAX, WIDTH_MIN

BETAS = (0.9, 0.999)
EPS = 1e-8


class ClampedAdam(torch.optim.Adam):
    """
    torch.optim.Adam (beta1=0.9, beta2=0.999, eps=1e-8), после шага параметры
    групп с ключом bounds обрезаются в заданный диапазон.
    """

    def __init__(self, params, lr: float, weight_decay: float = 0.0):
        super().__init__(params, lr=lr, betas=BETAS, eps=EPS, weight_decay=weight_decay)

    @torch.no_grad()
    def step(self, closure=None):
        loss = super().step(closure)
        for group in self.param_groups:
            bounds = group.get("bounds")
            if bounds is None:
                continue
            for param in group["params"]:
                param.clamp_(*bounds)
        return loss


def width_group(params: Iterable[torch.Tensor]) -> Dict:
    """Группа параметров-ширин с проекцией на [0, 100] нм."""
    return {"params": list(params), "bounds": (WIDTH_MIN, WIDTH_MAX)}


def adam_step(
    params: Sequence[torch.Tensor],
    grads: Sequence[torch.Tensor],
    state: Optional[Dict] = None,
    lr: float = 0.01,
    bounds: Optional[Tuple[float, float]] = (WIDTH_MIN, WIDTH_MAX)
) -> Tuple[List[torch.Tensor], Dict]:
    """
    Один шаг Adam по готовым градиентам.

    Args:
        params: Листовые тензоры параметров (изменяются на месте)
        grads: Градиенты той же формы
        state: Состояние оптимизатора от предыдущего шага
        lr: Шаг
        bounds: Диапазон проекции после шага (None - без проекции)

    Returns:
        Tuple[List[torch.Tensor], Dict]: Параметры и новое состояние
    """
    params = list(params)
    group = {"params": params}
    if bounds is not None:
        group["bounds"] = bounds
    optimizer = ClampedAdam([group], lr=lr)
    if state is not None:
        optimizer.load_state_dict(state)
        for loaded in optimizer.param_groups:
            loaded["lr"] = lr
    for param, grad in zip(params, grads):
        param.grad = grad.detach().clone()
    optimizer.step()
    for param in params:
        param.grad = None
    return params, optimizer.state_dict()
