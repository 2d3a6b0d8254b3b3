/* sys_set_ipc_from -- IPC */
int sys_set_ipc_from(pid_t sender)
{
    struct proc *cur;

    if (sender < 0 || sender >= NPROC)
        return -EINVAL;
    cur = get_proc(current);
    if (cur->state != PROC_RUNNING)
        return -EAGAIN;
    cur->ipc_from = sender;
    return 0;
}
