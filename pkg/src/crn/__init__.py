"""平衡反応ネットワーク: 質量作用反応速度、平衡集合、Gibbs自由エネルギー。"""
